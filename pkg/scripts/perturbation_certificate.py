#!/usr/bin/env python3
"""Certify (or reject) stable umbilical curves for sphere perturbations rho0 + eps rho'."""
import argparse
import random

from umbilic.algebra import Poly
from umbilic.experiments import PerturbationSpec, certify_stable_umbilic, random_real_poly

STOCK = [
    "z^2*wb^2 + zb^2*w^2",
    "z^3*wb^3 + zb^3*w^3",
    "z*zb",
    "z^5*zb + z*zb^5",
    "z^2*zb^6 + z^6*zb^2",
]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--random", type=int, default=5, help="extra random almost-circular quartics")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    rng = random.Random(args.seed)
    cases = [Poly.parse(s) for s in STOCK]
    cases += [random_real_poly(rng, 4, nterms=3, max_shift=3) for _ in range(args.random)]
    print(f"{'verdict':10s} {'W':>3s} {'n':>3s} {'m':>3s}  rho'")
    for rp in cases:
        rep = certify_stable_umbilic(PerturbationSpec(rp), seed=args.seed)
        fmt = lambda v: "-" if v is None else str(v)
        print(f"{rep.verdict:10s} {fmt(rep.winding):>3s} {fmt(rep.disk_roots):>3s} {fmt(rep.laurent_order):>3s}  {rp}")
        if rep.verdict != "certified":
            print(f"{'':22s}{rep.notes[-1]}")


if __name__ == "__main__":
    main()
