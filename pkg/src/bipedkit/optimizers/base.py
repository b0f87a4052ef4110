from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from ..model_core import NumericError, ValidationError


class BudgetError(ValidationError):
    pass


class NonFiniteObjective(NumericError):
    def __init__(self, theta, value):
        super().__init__(f"objective returned {value!r} at theta={np.array2string(np.asarray(theta))}")
        self.theta = np.asarray(theta)


@dataclass
class Objective:
    """Box-bounded cost to minimise."""

    dim: int
    bounds: np.ndarray
    evaluate: Callable[[np.ndarray], float]
    name: str = "objective"

    def __post_init__(self):
        b = np.array(self.bounds, dtype=float)
        if b.shape == (2,):
            b = np.tile(b, (self.dim, 1))
        if b.shape != (self.dim, 2):
            raise ValidationError(f"bounds must have shape ({self.dim}, 2)")
        if not np.all(np.isfinite(b)) or not np.all(b[:, 1] > b[:, 0]):
            raise ValidationError("bounds must be finite with lo < hi")
        self.bounds = b

    @property
    def lo(self):
        return self.bounds[:, 0]

    @property
    def hi(self):
        return self.bounds[:, 1]

    @property
    def span(self):
        return self.bounds[:, 1] - self.bounds[:, 0]

    def clip(self, x):
        return np.clip(x, self.lo, self.hi)


@dataclass
class OptResult:
    best_theta: np.ndarray
    best_cost: float
    history: list[float]
    evals_used: int
    seed: int
    algo: str = ""
    extras: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "algo": self.algo,
            "seed": self.seed,
            "best_theta": [float(v) for v in self.best_theta],
            "best_cost": float(self.best_cost),
            "evals_used": int(self.evals_used),
            "history": [float(v) for v in self.history],
        }


class Evaluator:
    """Counts evaluations, tracks the incumbent, and enforces the budget.

    Batches may be evaluated on a thread pool, but results always come back
    in candidate order so a run is reproducible whatever the worker count.
    """

    def __init__(self, obj: Objective, budget: int, workers: int = 1):
        self.obj = obj
        self.budget = int(budget)
        self.used = 0
        self.best_x: Optional[np.ndarray] = None
        self.best_f = math.inf
        self.history: list[float] = []
        self._pool = ThreadPoolExecutor(workers) if workers > 1 else None

    @property
    def remaining(self) -> int:
        return self.budget - self.used

    def _one(self, x):
        f = float(self.obj.evaluate(x))
        if not math.isfinite(f):
            raise NonFiniteObjective(x, f)
        return f

    def batch(self, xs) -> np.ndarray:
        xs = [np.array(x, dtype=float) for x in xs]
        if len(xs) > self.remaining:
            raise BudgetError("batch exceeds remaining budget")
        if self._pool is not None and len(xs) > 1:
            fs = list(self._pool.map(self._one, xs))
        else:
            fs = [self._one(x) for x in xs]
        self.used += len(xs)
        for x, f in zip(xs, fs):
            if f < self.best_f:
                self.best_f, self.best_x = f, x.copy()
        return np.array(fs)

    def __call__(self, x) -> float:
        return float(self.batch([x])[0])

    def end_iteration(self):
        self.history.append(self.best_f)

    def result(self, seed, algo, **extras) -> OptResult:
        if self._pool is not None:
            self._pool.shutdown()
        return OptResult(self.best_x, self.best_f, self.history, self.used, seed, algo, extras)


def uniform_in(obj: Objective, rng, n=None):
    shape = (obj.dim,) if n is None else (n, obj.dim)
    return obj.lo + rng.random(shape) * obj.span
