#!/usr/bin/env python3
"""Numeric scan of Q = det A_3 over M_eps and the winding decomposition on a slice disk."""
import argparse
import json
from pathlib import Path

from umbilic.algebra import Poly
from umbilic.experiments import PerturbationSpec, sigma_stokes_check, umbilic_grid_scan


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--rho-prime", default="z^2*wb^2 + zb^2*w^2")
    ap.add_argument("--eps", type=float, nargs="*", default=[0.01, 0.05])
    ap.add_argument("--grid", type=int, default=24)
    ap.add_argument("--csv-dir", type=Path, default=None)
    args = ap.parse_args()

    spec = PerturbationSpec(Poly.parse(args.rho_prime))
    for eps in args.eps:
        text, summary = umbilic_grid_scan(spec, eps, args.grid)
        print(json.dumps(summary, sort_keys=True))
        if args.csv_dir:
            args.csv_dir.mkdir(parents=True, exist_ok=True)
            (args.csv_dir / f"scan_eps{eps:g}.csv").write_text(text)
        res = sigma_stokes_check(spec, eps)
        print(f"  outer winding {res['outer_winding']} = sum {res['inner_windings']}: {res['holds']}")
        print(f"  zeros {res['zeros']}")
        print(f"  index sum {res['index_sum']}, outer index {res['outer_index']}")


if __name__ == "__main__":
    main()
