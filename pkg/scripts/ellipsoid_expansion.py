#!/usr/bin/env python3
"""Slice expansion of det A_3 on the ellipsoid family and the winding at chosen (A, B)."""
import argparse
import json
import time
from fractions import Fraction

from umbilic.experiments import EllipsoidFamily, ellipsoid_slice_expansion, ellipsoid_winding_certificate


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--pairs", nargs="*", default=["1,1", "2,1/3", "1/5,7", "1,0"], help="A,B pairs")
    ap.add_argument("--samples", type=int, default=1024)
    args = ap.parse_args()

    t0 = time.perf_counter()
    e0, e1, e2 = ellipsoid_slice_expansion(EllipsoidFamily())
    print(f"eps^0: {e0}")
    print(f"eps^1: {e1}")
    print(f"eps^2: {e2}")
    print(f"symbolic expansion: {time.perf_counter() - t0:.2f} s\n")

    for pair in args.pairs:
        A, B = (Fraction(x) for x in pair.split(","))
        rep = ellipsoid_winding_certificate(EllipsoidFamily(A, B), samples=args.samples)
        print(json.dumps({"A": str(A), "B": str(B), "verdict": rep.verdict, "winding": rep.winding}))


if __name__ == "__main__":
    main()
