"""Exact-engine wall time as the on-set grows with the off-set held fixed."""

import argparse
import statistics
import time

from boolrules.exact import ExactIntractable, ExactLimits, minimize_exact
from boolrules.synth import sample_instance


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--width", type=int, default=20)
    ap.add_argument("--off", type=int, default=1)
    ap.add_argument("--on", type=int, nargs="+", default=[100, 1000, 10_000])
    ap.add_argument("--seeds", type=int, default=10)
    ap.add_argument("--max-nodes", type=int, default=200_000)
    args = ap.parse_args()

    limits = ExactLimits(max_nodes=args.max_nodes)
    print("n_on\tmedian_s\tmax_s\tcubes\tgave_up")
    for n_on in args.on:
        times, cubes, gave_up = [], [], 0
        for seed in range(args.seeds):
            p = sample_instance(args.width, n_on, args.off, seed)
            t = time.perf_counter()
            try:
                cubes.append(len(minimize_exact(p, limits)))
            except ExactIntractable:
                gave_up += 1
            times.append(time.perf_counter() - t)
        med = statistics.median(times)
        print(f"{n_on}\t{med:.3f}\t{max(times):.3f}\t{statistics.median(cubes) if cubes else '-'}\t{gave_up}")


if __name__ == "__main__":
    main()
