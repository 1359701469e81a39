"""Fit a planted conjunction over many seeds and report how often it is recovered."""

import argparse
import time

from boolrules.learn import FitConfig, fit
from boolrules.synth import PlantedSpec, generate_planted


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--width", type=int, default=30)
    ap.add_argument("--arity", type=int, default=3, help="number of features in the planted rule")
    ap.add_argument("--rows", type=int, default=100_000)
    ap.add_argument("--class1-fraction", type=float, default=0.02)
    ap.add_argument("--seeds", type=int, default=100)
    ap.add_argument("--engine", default="heuristic", choices=("exact", "heuristic"))
    args = ap.parse_args()

    planted = "1" * args.arity + "-" * (args.width - args.arity)
    hits = 0
    start = time.perf_counter()
    for seed in range(args.seeds):
        df = generate_planted(PlantedSpec(args.width, (planted,), args.rows, args.class1_fraction, seed))
        got = fit(df, FitConfig(engine=args.engine)).cover.texts()
        if got == [planted]:
            hits += 1
        else:
            print(f"seed {seed}: {got}")
    print(f"recovered {hits}/{args.seeds} in {time.perf_counter() - start:.1f}s")


if __name__ == "__main__":
    main()
