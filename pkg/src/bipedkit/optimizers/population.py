"""Population searches: real-coded GA and global-best PSO."""
from __future__ import annotations

import numpy as np

from .base import BudgetError, Evaluator, Objective, uniform_in


def genetic_algorithm(obj: Objective, budget: int, rng, workers: int = 1,
                      pop_size: int = 50, tournament: int = 3, blend_alpha: float = 0.5,
                      mutation_rate: float | None = None, mutation_scale: float = 0.1,
                      mutation_floor: float = 0.01, elitism: int = 1):
    """Generational GA with tournament selection, BLX-alpha crossover and
    per-gene Gaussian mutation.

    Mutation noise is ``mutation_scale`` times the per-gene spread of the
    current population, so it shrinks as the population converges. A floor
    of ``mutation_floor`` times the box span, annealed linearly to zero over
    the budget, keeps collapsed genes from freezing early.
    """
    if budget < pop_size:
        raise BudgetError(f"GA needs a budget of at least pop_size={pop_size}")
    rate = 1.0 / obj.dim if mutation_rate is None else mutation_rate
    ev = Evaluator(obj, budget, workers)
    pop = uniform_in(obj, rng, pop_size)
    fit = ev.batch(pop)
    ev.end_iteration()
    while ev.remaining > 0:
        n_child = min(pop_size - elitism, ev.remaining)
        order = np.argsort(fit, kind="stable")
        elite = pop[order[:elitism]]
        elite_f = fit[order[:elitism]]

        def pick():
            idx = rng.integers(0, pop_size, tournament)
            return pop[idx[np.argmin(fit[idx])]]

        floor = mutation_floor * obj.span * ev.remaining / ev.budget
        spread = np.maximum(pop.std(axis=0), floor / mutation_scale)
        children = np.empty((n_child, obj.dim))
        for i in range(n_child):
            a, b = pick(), pick()
            lo, hi = np.minimum(a, b), np.maximum(a, b)
            d = hi - lo
            child = rng.uniform(lo - blend_alpha * d, hi + blend_alpha * d)
            mask = rng.random(obj.dim) < rate
            child = child + mask * rng.standard_normal(obj.dim) * mutation_scale * spread
            children[i] = obj.clip(child)
        child_f = ev.batch(children)
        pop = np.vstack([elite, children])
        fit = np.concatenate([elite_f, child_f])
        ev.end_iteration()
        if len(pop) < pop_size:  # budget ran out mid-generation
            break
    return ev.result(None, "ga")


def particle_swarm(obj: Objective, budget: int, rng, workers: int = 1,
                   swarm_size: int = 40, inertia: float = 0.72, cognitive: float = 1.49,
                   social: float = 1.49, vmax_fraction: float = 0.5):
    if budget < swarm_size:
        raise BudgetError(f"PSO needs a budget of at least swarm_size={swarm_size}")
    ev = Evaluator(obj, budget, workers)
    vmax = vmax_fraction * obj.span
    x = uniform_in(obj, rng, swarm_size)
    v = rng.uniform(-vmax, vmax, (swarm_size, obj.dim)) * 0.1
    f = ev.batch(x)
    ev.end_iteration()
    pbest, pbest_f = x.copy(), f.copy()
    while ev.remaining > 0:
        m = min(swarm_size, ev.remaining)
        g = pbest[int(np.argmin(pbest_f))]
        r1 = rng.random((swarm_size, obj.dim))
        r2 = rng.random((swarm_size, obj.dim))
        v = inertia * v + cognitive * r1 * (pbest - x) + social * r2 * (g - x)
        v = np.clip(v, -vmax, vmax)
        x = x + v
        out = (x < obj.lo) | (x > obj.hi)
        x = obj.clip(x)
        v[out] = 0.0
        f = ev.batch(x[:m])
        better = f < pbest_f[:m]
        pbest[:m][better] = x[:m][better]
        pbest_f[:m][better] = f[better]
        ev.end_iteration()
    return ev.result(None, "pso")
