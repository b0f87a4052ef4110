"""Contextual kick policy: desired distance -> 25 controller parameters.

The policy is linear in K normalised Gaussian RBF features of the
(normalised) kick distance. Training is a reward-weighted maximum
likelihood scheme: sample contexts and parameters, soft-max the
standardised rewards with a temperature that pins the effective sample
size, refit the weight matrix by weighted ridge regression and the search
covariance by a blended weighted scatter.

``SurrogateKick`` stands in for the simulated kick: a closed-form map from
parameters and context to achieved distance with a known optimum
``theta_star(s)``.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .model_core import NumericError, ValidationError
from .optimizers.cmaes import repair_spd
from .optimizers.episodic import EpisodicTask

CONTEXT_RANGE = (2.5, 12.5)
N_PARAMS = 25


def check_context(s, lo=CONTEXT_RANGE[0], hi=CONTEXT_RANGE[1]):
    s = np.asarray(s, dtype=float)
    if np.any(s < lo - 1e-12) or np.any(s > hi + 1e-12):
        raise ValidationError(f"kick distance outside [{lo}, {hi}] m")
    return s


@dataclass
class PolicyModel:
    centers: np.ndarray
    bandwidth_sq: float
    W: np.ndarray
    Sigma: np.ndarray
    context_range: tuple[float, float] = CONTEXT_RANGE

    def __post_init__(self):
        self.centers = np.asarray(self.centers, dtype=float)
        self.W = np.asarray(self.W, dtype=float)
        self.Sigma = np.asarray(self.Sigma, dtype=float)
        self.context_range = tuple(float(v) for v in self.context_range)
        K = len(self.centers)
        if K < 2 or np.any(np.diff(self.centers) <= 0):
            raise ValidationError("need at least 2 strictly increasing RBF centers")
        if self.W.ndim != 2 or self.W.shape[1] != K:
            raise ValidationError(f"W must have {K} columns")
        d = self.W.shape[0]
        if self.Sigma.shape != (d, d):
            raise ValidationError(f"Sigma must be {d}x{d}")
        if not np.all(np.isfinite(self.W)):
            raise ValidationError("W has non-finite entries")
        if not np.allclose(self.Sigma, self.Sigma.T, atol=1e-12) or \
                np.linalg.eigvalsh(self.Sigma).min() <= 0:
            raise ValidationError("Sigma must be symmetric positive definite")
        if self.bandwidth_sq < 0:
            raise ValidationError("bandwidth must be non-negative")

    @classmethod
    def initial(cls, K: int = 15, bandwidth_sq: float = 0.5, n_params: int = N_PARAMS,
                sigma0: float = 0.3, context_range=CONTEXT_RANGE, W=None) -> "PolicyModel":
        """Uniform centers over [0, 1] (endpoints included), zero mean, isotropic search."""
        W = np.zeros((n_params, K)) if W is None else W
        return cls(np.linspace(0.0, 1.0, K), bandwidth_sq, W, sigma0**2 * np.eye(n_params),
                   context_range)

    @property
    def K(self) -> int:
        return len(self.centers)

    @property
    def n_params(self) -> int:
        return self.W.shape[0]

    def normalise(self, s):
        lo, hi = self.context_range
        s = np.asarray(s, dtype=float)
        if hi == lo:
            return np.zeros_like(s)
        return (s - lo) / (hi - lo)

    def to_dict(self) -> dict:
        return {
            "centers": self.centers.tolist(),
            "bandwidth_sq": self.bandwidth_sq,
            "context_range": list(self.context_range),
            "W_shape": list(self.W.shape),
            "W": self.W.ravel().tolist(),
            "Sigma": self.Sigma.ravel().tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PolicyModel":
        W = np.array(d["W"], dtype=float).reshape(d["W_shape"])
        n = W.shape[0]
        return cls(d["centers"], float(d["bandwidth_sq"]), W,
                   np.array(d["Sigma"], dtype=float).reshape(n, n),
                   tuple(d.get("context_range", CONTEXT_RANGE)))

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=1))

    @classmethod
    def load(cls, path) -> "PolicyModel":
        return cls.from_dict(json.loads(Path(path).read_text()))


def rbf_features(s, model: PolicyModel) -> np.ndarray:
    """Normalised RBF activations; shape ``(K,)`` or ``(n, K)`` for array input."""
    s = check_context(s, *model.context_range)
    sn = model.normalise(s)
    d2 = (np.asarray(sn)[..., None] - model.centers) ** 2
    if model.bandwidth_sq == 0.0:
        logits = np.where(d2 == d2.min(axis=-1, keepdims=True), 0.0, -np.inf)
    else:
        logits = -d2 / (2.0 * model.bandwidth_sq)
    logits = logits - logits.max(axis=-1, keepdims=True)
    raw = np.exp(logits)
    return raw / raw.sum(axis=-1, keepdims=True)


def policy_mean(model: PolicyModel, s) -> np.ndarray:
    return rbf_features(s, model) @ model.W.T


def lipschitz_bound(model: PolicyModel) -> float:
    """Upper bound on ``|d policy_mean / ds|`` over the context range."""
    lo, hi = model.context_range
    if hi == lo:
        return 0.0
    # |d phi_j / ds_n| sums to at most 2 max_j |s_n - c_j| / sigma^2 <= 2 / sigma^2
    reach = max(1.0, float(np.max(np.abs(model.centers))), float(np.max(np.abs(1 - model.centers))))
    col = np.linalg.norm(model.W, axis=0).max()
    return 2.0 * reach / model.bandwidth_sq * col / (hi - lo)


# ---------------------------------------------------------------------------
# Surrogate task
# ---------------------------------------------------------------------------


class SurrogateKick:
    """Deterministic stand-in for the simulated kick.

    With ``u = (s - 2.5) / 10`` the optimal parameters are::

        theta*_0(s) = (s - 7.5) / 5
        theta*_j(s) = 0.3 sin(1.3 j) + 0.5 cos(0.7 j) (u - 0.5) + 0.15 sin(pi u + 0.4 j)

    for ``j = 1..24``. The first parameter alone sets a nominal distance
    ``s_lin = 7.5 + 5 theta_0``; deviation of the others from their optimum
    at ``s_lin`` costs distance quadratically::

        achieved = s_lin - gamma * ||theta_rest - theta*_rest(s_lin)||^2
        reward   = -|achieved - s|
    """

    def __init__(self, gamma: float = 1.0, noise_std: float = 0.0,
                 context_range=CONTEXT_RANGE, n_params: int = N_PARAMS):
        self.gamma = gamma
        self.noise_std = noise_std
        self.context_range = tuple(context_range)
        self.n_params = n_params
        j = np.arange(1, n_params)
        self._alpha = 0.3 * np.sin(1.3 * j)
        self._beta = 0.5 * np.cos(0.7 * j)
        self._phase = 0.4 * j

    def theta_star(self, s) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        u = (s - 2.5) / 10.0
        rest = (self._alpha + self._beta * (u[..., None] - 0.5)
                + 0.15 * np.sin(math.pi * u[..., None] + self._phase))
        first = ((s - 7.5) / 5.0)[..., None]
        return np.concatenate([first, rest], axis=-1)

    def nominal_distance(self, theta) -> np.ndarray:
        return 7.5 + 5.0 * np.asarray(theta)[..., 0]

    def achieved(self, theta, rng=None) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        s_lin = self.nominal_distance(theta)
        delta = theta[..., 1:] - self.theta_star(s_lin)[..., 1:]
        out = s_lin - self.gamma * np.sum(delta**2, axis=-1)
        if self.noise_std > 0 and rng is not None:
            out = out + self.noise_std * rng.standard_normal(np.shape(out))
        return out

    def __call__(self, theta, s, seed=None):
        """``(achieved, reward)`` for parameters ``theta`` at desired distance ``s``."""
        rng = np.random.default_rng(seed) if (seed is not None and self.noise_std > 0) else None
        a = self.achieved(theta, rng)
        return a, -np.abs(a - np.asarray(s, dtype=float))

    def sample_contexts(self, rng, n: int) -> np.ndarray:
        lo, hi = self.context_range
        return rng.uniform(lo, hi, n)


def surrogate_kick(theta, s, seed=None, task: Optional[SurrogateKick] = None):
    return (task or SurrogateKick())(theta, s, seed)


class KickEpisode(EpisodicTask):
    """One-shot episode: the observation is the desired distance, the single
    action is a parameter vector, the reward is ``-|achieved - desired|``."""

    def __init__(self, distance: float, task: Optional[SurrogateKick] = None, seed=None):
        super().__init__()
        self.distance = distance
        self.task = task or SurrogateKick()
        self.seed = seed
        self.last_achieved = None

    def _reset(self):
        return self.distance

    def _step(self, action):
        a, r = self.task(np.asarray(action), self.distance, self.seed)
        self.last_achieved = float(a)
        return None, float(r), True


# ---------------------------------------------------------------------------
# Training
# ---------------------------------------------------------------------------


def effective_sample_size(w) -> float:
    w = np.asarray(w, dtype=float)
    return float(w.sum() ** 2 / np.sum(w**2))


def softmax_weights(rewards, ess_band=(0.4, 0.6), iters: int = 100) -> np.ndarray:
    """Normalised ``exp(R'/eta)`` weights with ``eta`` bisected until the
    effective sample size falls inside ``ess_band`` (fractions of n)."""
    r = np.asarray(rewards, dtype=float)
    n = len(r)
    if not np.all(np.isfinite(r)):
        raise NumericError("non-finite reward")
    sd = r.std()
    if sd == 0.0:
        return np.full(n, 1.0 / n)
    z = (r - r.mean()) / sd
    target = 0.5 * (ess_band[0] + ess_band[1]) * n

    def weights(log_eta):
        a = z / math.exp(log_eta)
        w = np.exp(a - a.max())
        return w / w.sum()

    lo, hi = -12.0, 12.0  # log eta
    w = weights(0.0)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        w = weights(mid)
        ess = effective_sample_size(w)
        if ess_band[0] * n <= ess <= ess_band[1] * n:
            break
        if ess < target:
            lo = mid  # too peaked: raise temperature
        else:
            hi = mid
    return w


@dataclass
class TrainLog:
    iteration_errors: list[float] = field(default_factory=list)
    min_sigma_eig: list[float] = field(default_factory=list)


def context_baseline(sn, rewards, degree: int = 2) -> np.ndarray:
    """Least-squares polynomial fit of reward against normalised context."""
    V = np.vander(np.asarray(sn, dtype=float), degree + 1)
    coef, *_ = np.linalg.lstsq(V, rewards, rcond=None)
    return V @ coef


def train_contextual(task: SurrogateKick, model0: PolicyModel, iterations: int = 300,
                     samples_per_iter: int = 64, seed: int = 0, ridge: float = 1e-6,
                     forgetting: float = 0.2, baseline_degree: int | None = 2,
                     eval_contexts=None,
                     log: Optional[TrainLog] = None) -> PolicyModel:
    """Reward-weighted regression for the contextual policy.

    ``forgetting`` is the weight given to the new covariance estimate.
    Rewards are first turned into advantages by subtracting a least-squares
    polynomial of degree ``baseline_degree`` in the normalised context, so
    hard and easy contexts compete on equal terms; ``None`` disables it.
    When ``eval_contexts`` and ``log`` are supplied, the noise-free mean
    error of the current mean policy is recorded after every iteration.
    """
    K = model0.K
    lam = samples_per_iter
    if lam < 2 * (K + 1):
        raise ValidationError(f"samples_per_iter must be >= 2(K+1) = {2 * (K + 1)}")
    rng = np.random.default_rng(seed)
    W = model0.W.copy()
    Sigma = model0.Sigma.copy()
    lo, hi = model0.context_range
    model = model0
    for _ in range(iterations):
        s = rng.uniform(lo, hi, lam) if hi > lo else np.full(lam, lo)
        phi = rbf_features(s, model)
        mean = phi @ W.T
        L = np.linalg.cholesky(Sigma)
        theta = mean + rng.standard_normal((lam, W.shape[0])) @ L.T
        _, R = task(theta, s, int(rng.integers(2**31)))
        if not np.all(np.isfinite(R)):
            raise NumericError("non-finite reward")
        if baseline_degree is not None and hi > lo:
            R = R - context_baseline(model.normalise(s), R, baseline_degree)
        w = softmax_weights(R)

        A = (phi.T * w) @ phi + ridge * np.eye(K)
        B = (theta.T * w) @ phi + ridge * W
        W = np.linalg.solve(A, B.T).T
        resid = theta - phi @ W.T
        S = (resid.T * w) @ resid
        Sigma, d, _ = repair_spd((1.0 - forgetting) * Sigma + forgetting * S, floor=1e-12)
        if not np.all(np.isfinite(Sigma)):
            raise NumericError("search covariance became non-finite")
        model = PolicyModel(model0.centers, model0.bandwidth_sq, W, Sigma, model0.context_range)
        if log is not None:
            log.min_sigma_eig.append(float(d.min()))
            if eval_contexts is not None:
                log.iteration_errors.append(eval_policy(model, task, eval_contexts)[0])
    return model


def eval_policy(model: PolicyModel, task: SurrogateKick, contexts, seed=None):
    """Noise-free mean and per-context ``|achieved - desired|``."""
    contexts = check_context(contexts, *model.context_range)
    theta = policy_mean(model, contexts)
    achieved = task.achieved(theta)
    err = np.abs(achieved - contexts)
    return float(err.mean()), err
