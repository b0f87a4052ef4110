"""Single-trajectory searches: adaptive hill climbing and continuous tabu search."""
from __future__ import annotations

import numpy as np

from .base import BudgetError, Evaluator, Objective, uniform_in


def hill_climb(obj: Objective, budget: int, rng, workers: int = 1, x0=None,
               sigma0: float = 0.1, n_neighbors: int | None = None,
               grow: float = 1.2, shrink: float = 0.5, restart_after: int = 200,
               min_sigma: float = 1e-12):
    """Gaussian hill climbing with a multiplicative step rule.

    Each iteration draws ``n_neighbors`` perturbations (``sigma`` in units
    of the box span); the best one replaces the current point if it is
    strictly better. ``sigma`` grows by ``grow`` on success and shrinks by
    ``shrink`` on failure. After ``restart_after`` consecutive failures the
    walk restarts from a fresh uniform point.
    """
    if budget < 1:
        raise BudgetError("hill climbing needs a budget of at least 1")
    n_neighbors = n_neighbors or max(2, 2 * obj.dim)
    ev = Evaluator(obj, budget, workers)
    x = uniform_in(obj, rng) if x0 is None else obj.clip(np.asarray(x0, dtype=float))
    fx = ev(x)
    ev.end_iteration()
    sigma = sigma0
    stalls = 0
    restarts = 0
    while ev.remaining > 0:
        if stalls >= restart_after:
            x = uniform_in(obj, rng)
            fx = ev(x)
            ev.end_iteration()
            sigma, stalls = sigma0, 0
            restarts += 1
            continue
        m = min(n_neighbors, ev.remaining)
        cand = obj.clip(x + sigma * obj.span * rng.standard_normal((m, obj.dim)))
        fs = ev.batch(cand)
        k = int(np.argmin(fs))
        if fs[k] < fx:
            x, fx = cand[k], fs[k]
            sigma *= grow
            stalls = 0
        else:
            sigma = max(sigma * shrink, min_sigma)
            stalls += 1
        ev.end_iteration()
    return ev.result(None, "hc", restarts=restarts)


def tabu_search(obj: Objective, budget: int, rng, workers: int = 1, x0=None,
                n_candidates: int = 20, tabu_size: int = 50, radius: float = 0.05,
                sigma0: float = 0.1, patience: int = 10, shrink: float = 0.5,
                min_sigma: float = 1e-12):
    """Continuous tabu search.

    The last ``tabu_size`` accepted points form the tabu list; a candidate
    closer than ``radius`` (normalised by the box span, and scaled with the
    current step) to any of them is forbidden unless it beats the
    best-so-far (aspiration). The best admissible candidate is always
    accepted, even when it is worse than the current point. The sampling
    step halves after ``patience`` iterations without a new best.
    """
    if budget < 1:
        raise BudgetError("tabu search needs a budget of at least 1")
    ev = Evaluator(obj, budget, workers)
    x = uniform_in(obj, rng) if x0 is None else obj.clip(np.asarray(x0, dtype=float))
    ev(x)
    ev.end_iteration()
    tabu = [x / obj.span]
    sigma = sigma0
    since_best = 0
    while ev.remaining > 0:
        m = min(n_candidates, ev.remaining)
        cand = obj.clip(x + sigma * obj.span * rng.standard_normal((m, obj.dim)))
        best_before = ev.best_f
        fs = ev.batch(cand)
        r = radius * sigma / sigma0
        arch = np.array(tabu)
        dist = np.linalg.norm((cand / obj.span)[:, None, :] - arch[None, :, :], axis=2).min(axis=1)
        admissible = (dist >= r) | (fs < best_before)
        if admissible.any():
            idx = np.flatnonzero(admissible)
            k = idx[int(np.argmin(fs[idx]))]
            x = cand[k]
            tabu.append(x / obj.span)
            if len(tabu) > tabu_size:
                tabu.pop(0)
        if ev.best_f < best_before:
            since_best = 0
        else:
            since_best += 1
            if since_best >= patience:
                sigma = max(sigma * shrink, min_sigma)
                x = ev.best_x.copy()
                since_best = 0
        ev.end_iteration()
    return ev.result(None, "ts")
