#!/usr/bin/env python3
"""Train the contextual kick policy on the surrogate over several seeds.

Prints the held-out error curve every few iterations and optionally saves
the model from the first seed.
"""
import argparse

import numpy as np

from bipedkit.contextual_kick import (
    CONTEXT_RANGE,
    PolicyModel,
    SurrogateKick,
    TrainLog,
    eval_policy,
    train_contextual,
)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--iterations", type=int, default=300)
    ap.add_argument("--samples", type=int, default=64)
    ap.add_argument("--rbfs", type=int, default=15)
    ap.add_argument("--bandwidth-sq", type=float, default=0.5)
    ap.add_argument("--seeds", type=int, default=5)
    ap.add_argument("--noise", type=float, default=0.0, help="observation noise on achieved distance")
    ap.add_argument("--every", type=int, default=50)
    ap.add_argument("--save", default=None, help="write the seed-0 model here")
    args = ap.parse_args()

    task = SurrogateKick(noise_std=args.noise)
    held_out = np.random.default_rng(2024).uniform(*CONTEXT_RANGE, 100)
    finals = []
    for seed in range(args.seeds):
        log = TrainLog()
        model = train_contextual(task, PolicyModel.initial(args.rbfs, args.bandwidth_sq),
                                 args.iterations, args.samples, seed,
                                 eval_contexts=held_out, log=log)
        curve = log.iteration_errors[args.every - 1::args.every]
        print(f"seed {seed}: " + " ".join(f"{e:.3f}" for e in curve))
        mean, err = eval_policy(model, SurrogateKick(), held_out)
        finals.append(mean)
        if seed == 0 and args.save:
            model.save(args.save)
    print(f"final mean error {np.mean(finals):.3f} +- {np.std(finals):.3f} m over {args.seeds} seeds")


if __name__ == "__main__":
    main()
