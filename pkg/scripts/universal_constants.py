#!/usr/bin/env python3
"""Derive c_3, c_4 (and optionally c_5) from random normal-form witnesses."""
import argparse
import random
import time

from umbilic.normal_form import derive_universal_constant, random_normal_form


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, nargs="*", default=[3, 4])
    ap.add_argument("--witnesses", type=int, default=5)
    ap.add_argument("--u-degree", type=int, default=0, help="u-dependence of the random jets")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    rng = random.Random(args.seed)
    for n in args.n:
        # weight 2n + 2 is the highest jet entering the origin formula
        w = max(8, 2 * n + 2)
        t0 = time.perf_counter()
        uc = derive_universal_constant(n, [random_normal_form(rng, w, args.u_degree) for _ in range(args.witnesses)])
        print(f"c_{n} = {uc.value}   ({time.perf_counter() - t0:.2f} s)")
        for line in uc.transcript:
            print("   ", line)


if __name__ == "__main__":
    main()
