"""Black-box optimizer suite behind one ``optimize`` entry point."""
from __future__ import annotations

import numpy as np

from .base import BudgetError, NonFiniteObjective, Objective, OptResult
from .cmaes import CMAES, cmaes, default_popsize, repair_spd
from .episodic import ConstantRewardTask, EpisodeFinished, EpisodicTask, run_episode
from .local import hill_climb, tabu_search
from .population import genetic_algorithm, particle_swarm
from ..model_core import ValidationError

ALGORITHMS = {
    "hc": hill_climb,
    "ts": tabu_search,
    "ga": genetic_algorithm,
    "pso": particle_swarm,
    "cmaes": cmaes,
}


def min_budget(algo: str, obj: Objective, **options) -> int:
    algo = algo.lower()
    if algo == "ga":
        return options.get("pop_size", 50)
    if algo == "pso":
        return options.get("swarm_size", 40)
    if algo == "cmaes":
        return options.get("popsize") or default_popsize(obj.dim)
    return 1


def optimize(algo: str, obj: Objective, budget: int, seed: int, workers: int = 1,
             **options) -> OptResult:
    """Minimise ``obj`` with ``algo`` in at most ``budget`` evaluations.

    The result depends only on ``(algo, obj, budget, seed, options)``.
    """
    key = algo.lower()
    if key not in ALGORITHMS:
        raise ValidationError(f"unknown algorithm {algo!r}; choose from {sorted(ALGORITHMS)}")
    need = min_budget(key, obj, **options)
    if budget < need:
        raise BudgetError(f"{key} needs a budget of at least {need} (got {budget})")
    rng = np.random.default_rng(seed)
    res = ALGORITHMS[key](obj, budget, rng, workers=workers, **options)
    res.seed = seed
    return res


def sphere(dim: int, bound: float = 5.0) -> Objective:
    return Objective(dim, (-bound, bound), lambda x: float(np.dot(x, x)), "sphere")


def rosenbrock(dim: int, bound: float = 5.0) -> Objective:
    def f(x):
        return float(np.sum(100.0 * (x[1:] - x[:-1] ** 2) ** 2 + (1.0 - x[:-1]) ** 2))
    return Objective(dim, (-bound, bound), f, "rosenbrock")


__all__ = [
    "ALGORITHMS", "BudgetError", "CMAES", "ConstantRewardTask", "EpisodeFinished",
    "EpisodicTask", "NonFiniteObjective", "Objective", "OptResult", "cmaes", "genetic_algorithm",
    "hill_climb", "min_budget", "optimize", "particle_swarm", "repair_spd", "rosenbrock",
    "run_episode", "sphere", "tabu_search",
]
