#!/usr/bin/env python3
"""Walk every (vx, omega) cell of the default sweep and print margins.

    python scripts/stability_sweep.py --duration 10 --solver both
"""
import argparse
import itertools
import time

from bipedkit import GaitCommand, RobotParams, simulate_walk
from bipedkit.pipeline import SOLVERS


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--duration", type=float, default=10.0)
    ap.add_argument("--solver", choices=(*SOLVERS, "both"), default="pendulum")
    ap.add_argument("--vx", type=float, nargs="+", default=[0.0, 0.05, 0.1, 0.15])
    ap.add_argument("--omega", type=float, nargs="+", default=[0.0, 0.2])
    ap.add_argument("--impulse", type=float, default=0.0, help="forward push at t=duration/2, m/s")
    ap.add_argument("--balance", choices=("on", "off"), default="on")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    p = RobotParams()
    solvers = SOLVERS if args.solver == "both" else (args.solver,)
    push = [(args.duration / 2, args.impulse)] if args.impulse else []
    print(f"{'solver':>10} {'vx':>5} {'omega':>5} {'min margin mm':>14} {'fallen':>6}")
    t0 = time.perf_counter()
    for solver, vx, om in itertools.product(solvers, args.vx, args.omega):
        log = simulate_walk(GaitCommand(vx, 0.0, om), p, solver, push, args.balance == "on",
                            args.duration, args.seed, with_joints=False)
        print(f"{solver:>10} {vx:5.2f} {om:5.2f} {1000 * log.min_margin:14.2f} {str(log.fallen):>6}")
    print(f"{time.perf_counter() - t0:.1f} s")


if __name__ == "__main__":
    main()
