"""(mu/mu_w, lambda)-CMA-ES with rank-one + rank-mu covariance update and
cumulative step-size adaptation. Box constraints: resample, then project."""
from __future__ import annotations

import math

import numpy as np

from .base import BudgetError, Evaluator, Objective, uniform_in

SPD_FLOOR = 1e-14


def default_popsize(dim: int) -> int:
    return 4 + int(math.floor(3.0 * math.log(dim)))


def repair_spd(C: np.ndarray, floor: float = SPD_FLOOR):
    """Symmetrise and lift eigenvalues to ``floor``. Returns (C, eigvals, eigvecs)."""
    C = 0.5 * (C + C.T)
    d, B = np.linalg.eigh(C)
    if d.min() < floor:
        d = np.maximum(d, floor)
        C = (B * d) @ B.T
        C = 0.5 * (C + C.T)
    return C, d, B


class CMAES:
    def __init__(self, obj: Objective, rng, mean=None, sigma0: float = 0.3,
                 popsize: int | None = None, max_resample: int = 100):
        n = obj.dim
        self.obj, self.rng, self.n = obj, rng, n
        self.lam = popsize or default_popsize(n)
        self.mu = self.lam // 2
        w = math.log(self.mu + 0.5) - np.log(np.arange(1, self.mu + 1))
        self.weights = w / w.sum()
        self.mueff = 1.0 / np.sum(self.weights**2)
        mueff = self.mueff
        self.cs = (mueff + 2) / (n + mueff + 5)
        self.ds = 1 + 2 * max(0.0, math.sqrt((mueff - 1) / (n + 1)) - 1) + self.cs
        self.cc = (4 + mueff / n) / (n + 4 + 2 * mueff / n)
        self.c1 = 2 / ((n + 1.3) ** 2 + mueff)
        self.cmu = min(1 - self.c1, 2 * (mueff - 2 + 1 / mueff) / ((n + 2) ** 2 + mueff))
        self.chi_n = math.sqrt(n) * (1 - 1 / (4 * n) + 1 / (21 * n * n))
        scale = float(np.mean(obj.span))
        self.mean = uniform_in(obj, rng) if mean is None else np.array(mean, dtype=float)
        self.sigma = sigma0 * scale
        self.C = np.diag((obj.span / scale) ** 2)
        self.C, self.D2, self.B = repair_spd(self.C)
        self.ps = np.zeros(n)
        self.pc = np.zeros(n)
        self.max_resample = max_resample
        self.generation = 0
        self.min_eigs: list[float] = []

    def ask(self, m: int) -> np.ndarray:
        BD = self.B * np.sqrt(self.D2)
        out = np.empty((m, self.n))
        for i in range(m):
            for _ in range(self.max_resample):
                x = self.mean + self.sigma * (BD @ self.rng.standard_normal(self.n))
                if np.all(x >= self.obj.lo) and np.all(x <= self.obj.hi):
                    break
            out[i] = self.obj.clip(x)
        return out

    def tell(self, xs: np.ndarray, fs: np.ndarray) -> None:
        n = self.n
        order = np.argsort(fs, kind="stable")[: self.mu]
        y = (xs[order] - self.mean) / self.sigma
        yw = self.weights @ y
        self.mean = self.mean + self.sigma * yw
        inv_sqrt = (self.B / np.sqrt(self.D2)) @ self.B.T
        self.ps = (1 - self.cs) * self.ps + math.sqrt(self.cs * (2 - self.cs) * self.mueff) * (inv_sqrt @ yw)
        self.generation += 1
        ps_norm = np.linalg.norm(self.ps)
        hsig = ps_norm / math.sqrt(1 - (1 - self.cs) ** (2 * self.generation)) / self.chi_n < 1.4 + 2 / (n + 1)
        self.pc = (1 - self.cc) * self.pc + hsig * math.sqrt(self.cc * (2 - self.cc) * self.mueff) * yw
        rank_mu = (y.T * self.weights) @ y
        C = ((1 - self.c1 - self.cmu) * self.C
             + self.c1 * (np.outer(self.pc, self.pc) + (1 - hsig) * self.cc * (2 - self.cc) * self.C)
             + self.cmu * rank_mu)
        self.C, self.D2, self.B = repair_spd(C)
        self.min_eigs.append(float(self.D2.min()))
        self.sigma *= math.exp((self.cs / self.ds) * (ps_norm / self.chi_n - 1))

    def converged(self) -> bool:
        return self.sigma * math.sqrt(self.D2.max()) < 1e-18 * float(np.max(self.obj.span))


def cmaes(obj: Objective, budget: int, rng, workers: int = 1, x0=None, sigma0: float = 0.3,
          popsize: int | None = None):
    es = CMAES(obj, rng, mean=x0, sigma0=sigma0, popsize=popsize)
    if budget < es.lam:
        raise BudgetError(f"CMA-ES needs a budget of at least lambda={es.lam}")
    ev = Evaluator(obj, budget, workers)
    while ev.remaining > 0 and not es.converged():
        m = min(es.lam, ev.remaining)
        xs = es.ask(m)
        fs = ev.batch(xs)
        if m == es.lam:
            es.tell(xs, fs)
        ev.end_iteration()
        if ev.best_f == 0.0:
            break
    return ev.result(None, "cmaes", min_eigs=es.min_eigs, lam=es.lam, final_sigma=es.sigma)
