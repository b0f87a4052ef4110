#!/usr/bin/env python3
"""Run every optimiser on one benchmark problem and tabulate the best cost."""
import argparse
import time

import numpy as np

from bipedkit.optimizers import ALGORITHMS, optimize
from bipedkit.problems import PROBLEMS, make_problem


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--problem", choices=PROBLEMS, default="sphere")
    ap.add_argument("--dim", type=int, default=5)
    ap.add_argument("--budget", type=int, default=20_000)
    ap.add_argument("--seeds", type=int, default=3)
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()

    obj = make_problem(args.problem, args.dim)
    print(f"{obj.name}: dim={obj.dim} budget={args.budget}")
    print(f"{'algo':>6} {'median best':>12} {'worst best':>12} {'s/run':>7}")
    for algo in sorted(ALGORITHMS):
        costs, t0 = [], time.perf_counter()
        for seed in range(args.seeds):
            costs.append(optimize(algo, obj, args.budget, seed=seed, workers=args.workers).best_cost)
        dt = (time.perf_counter() - t0) / args.seeds
        print(f"{algo:>6} {np.median(costs):12.3e} {max(costs):12.3e} {dt:7.2f}")


if __name__ == "__main__":
    main()
