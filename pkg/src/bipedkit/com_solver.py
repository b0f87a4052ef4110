"""CoM <-> ZMP for the cart-table and variable-height inverted pendulum.

Forward direction (CoM -> ZMP)::

    T_p = M (g + z'') (x - P_x) - M x'' z
    P_x = x - z x'' / (g + z'')        (same for y)

Inverse direction: a periodic Fourier solution of the constant-height
cart-table, and a finite-difference boundary-value solve for a prescribed
height profile.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model_core import (
    SINGULARITY_EPS,
    ComTrajectory,
    NumericError,
    RobotParams,
    SingularityError,
    ValidationError,
    ZmpReference,
    _frozen_array,
)
from .zmp_planner import HeightProfile, second_difference


def compute_moment(x, ax, z, az, p_x, params: RobotParams) -> float:
    """Moment about the ground point ``p_x`` for one axis (N m)."""
    g = params.gravity_g
    if g + az <= SINGULARITY_EPS:
        raise SingularityError(0, g + az)
    M = params.mass_M
    return M * (g + az) * (x - p_x) - M * ax * z


def zmp_from_com(x, ax, z, az, g):
    """Vectorised ZMP for one axis; no guard."""
    return x - z * ax / (g + az)


def compute_zmp(traj: ComTrajectory, params: RobotParams) -> ZmpReference:
    g = params.gravity_g
    denom = g + traj.az
    bad = np.flatnonzero(denom <= SINGULARITY_EPS)
    if bad.size:
        raise SingularityError(int(bad[0]), float(denom[bad[0]]))
    return ZmpReference(traj.dt, zmp_from_com(traj.x, traj.ax, traj.z, traj.az, g),
                        zmp_from_com(traj.y, traj.ay, traj.z, traj.az, g))


# ---------------------------------------------------------------------------
# Cart-table, analytic periodic solution
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FourierZmp:
    """``a0 + sum_k a_k cos(k w t) + b_k sin(k w t)``, ``k = 1..K``."""

    fundamental_omega: float
    a0: float
    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "a", _frozen_array(self.a))
        object.__setattr__(self, "b", _frozen_array(self.b))
        if len(self.a) < 1 or self.a.shape != self.b.shape:
            raise ValidationError("need at least one harmonic and matching a/b")

    @property
    def n_harmonics(self) -> int:
        return len(self.a)

    def evaluate(self, t, derivative: int = 0):
        """Value (or ``derivative``-th time derivative) of the series at ``t``."""
        t = np.asarray(t, dtype=float)
        k = np.arange(1, self.n_harmonics + 1)
        wk = k * self.fundamental_omega
        ph = np.multiply.outer(t, wk)
        c, s = np.cos(ph), np.sin(ph)
        # d^n/dt^n of cos and sin cycles with period 4
        terms = [(c, s), (-s, c), (-c, -s), (s, -c)][derivative % 4]
        out = (terms[0] * self.a + terms[1] * self.b) * wk**derivative
        out = out.sum(axis=-1)
        return out + (self.a0 if derivative == 0 else 0.0)

    def scaled(self, gains) -> "FourierZmp":
        return FourierZmp(self.fundamental_omega, self.a0, self.a * gains, self.b * gains)


def fit_fourier(samples, dt: float, n_harmonics: int | None = None) -> FourierZmp:
    """DFT coefficients of one period of uniformly sampled data."""
    v = np.asarray(samples, dtype=float)
    n = len(v)
    kmax = (n - 1) // 2
    if n_harmonics is None:
        n_harmonics = kmax
    if n_harmonics < 1 or n < 2 * n_harmonics + 1:
        raise ValidationError(
            f"{n} samples cannot determine {n_harmonics} harmonics (need 2K+1)")
    P = np.fft.rfft(v)
    a = 2.0 * P[1:n_harmonics + 1].real / n
    b = -2.0 * P[1:n_harmonics + 1].imag / n
    return FourierZmp(2.0 * math.pi / (n * dt), P[0].real / n, a, b)


def cart_table_gain(k, omega, omega0_sq):
    """Steady-state amplitude ratio CoM/ZMP of harmonic ``k``."""
    return omega0_sq / (omega0_sq + (np.asarray(k) * omega) ** 2)


def solve_com_cart_table_fourier(zmp: ZmpReference, params: RobotParams,
                                 n_harmonics: int | None = None,
                                 extension: str = "periodic") -> ComTrajectory:
    """Periodic steady-state CoM of the constant-height cart-table.

    ``extension="periodic"`` treats the samples as exactly one period.
    ``extension="even"`` first mirrors the signal in time so a non-periodic
    gait (start and stop at rest) becomes periodic; the first half of the
    solution is returned.
    """
    n = len(zmp)
    h = params.nominal_com_height_h
    g = params.gravity_g
    if extension == "even":
        ext = lambda v: np.concatenate([v, v[::-1]])
    elif extension == "periodic":
        ext = lambda v: v
    else:
        raise ValidationError(f"unknown extension {extension!r}")
    out = {}
    for axis, samples in (("x", zmp.px), ("y", zmp.py)):
        series = fit_fourier(ext(samples), zmp.dt, n_harmonics)
        k = np.arange(1, series.n_harmonics + 1)
        com = series.scaled(cart_table_gain(k, series.fundamental_omega, g / h))
        t = zmp.t
        out[axis] = com.evaluate(t)
        out["a" + axis] = com.evaluate(t, derivative=2)
    return ComTrajectory(zmp.dt, out["x"], out["y"], np.full(n, h), out["ax"], out["ay"],
                         np.zeros(n), g=g)


def fourier_reconstruction(zmp: ZmpReference, n_harmonics: int | None = None,
                           extension: str = "periodic") -> ZmpReference:
    """What the analytic solver actually tracks: the truncated series of the input."""
    cols = []
    for samples in (zmp.px, zmp.py):
        v = np.concatenate([samples, samples[::-1]]) if extension == "even" else samples
        cols.append(fit_fourier(v, zmp.dt, n_harmonics).evaluate(zmp.t))
    return ZmpReference(zmp.dt, *cols)


# ---------------------------------------------------------------------------
# Variable-height pendulum, finite-difference boundary-value problem
# ---------------------------------------------------------------------------


def solve_tridiagonal(lower, diag, upper, rhs) -> np.ndarray:
    """Thomas elimination for ``A x = rhs``.

    ``lower[i]`` multiplies ``x[i-1]`` in row ``i`` (``lower[0]`` unused),
    ``upper[i]`` multiplies ``x[i+1]`` (``upper[-1]`` unused).
    """
    n = len(diag)
    c = np.empty(n)
    d = np.empty(n)
    lower = np.asarray(lower, dtype=float).tolist()
    diag = np.asarray(diag, dtype=float).tolist()
    upper = np.asarray(upper, dtype=float).tolist()
    rhs = np.asarray(rhs, dtype=float).tolist()
    scale = max(abs(v) for v in diag) or 1.0
    beta = diag[0]
    if abs(beta) <= 1e-14 * scale:
        raise NumericError("zero pivot at row 0")
    c_prev = upper[0] / beta if n > 1 else 0.0
    d_prev = rhs[0] / beta
    c[0], d[0] = c_prev, d_prev
    for i in range(1, n):
        li = lower[i]
        beta = diag[i] - li * c_prev
        if abs(beta) <= 1e-14 * scale:
            raise NumericError(f"zero pivot at row {i}")
        c_prev = upper[i] / beta if i < n - 1 else 0.0
        d_prev = (rhs[i] - li * d_prev) / beta
        c[i], d[i] = c_prev, d_prev
    x = np.empty(n)
    x[-1] = d[-1]
    for i in range(n - 2, -1, -1):
        x[i] = d[i] - c[i] * x[i + 1]
    return x


def solve_cyclic_tridiagonal(lower, diag, upper, rhs) -> np.ndarray:
    """Periodic tridiagonal system: ``lower[0]`` couples row 0 to ``x[-1]``
    and ``upper[-1]`` couples the last row to ``x[0]`` (Sherman-Morrison)."""
    n = len(diag)
    if n < 3:
        raise ValidationError("cyclic system needs at least 3 unknowns")
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    alpha, beta = upper[-1], lower[0]
    gamma = -diag[0]
    bb = np.array(diag, dtype=float)
    bb[0] -= gamma
    bb[-1] -= alpha * beta / gamma
    x = solve_tridiagonal(lower, bb, upper, rhs)
    u = np.zeros(n)
    u[0], u[-1] = gamma, alpha
    zz = solve_tridiagonal(lower, bb, upper, u)
    fact = (x[0] + beta * x[-1] / gamma) / (1.0 + zz[0] + beta * zz[-1] / gamma)
    return x - fact * zz


def pendulum_coefficients(height: HeightProfile, g: float) -> np.ndarray:
    denom = g + height.az_samples
    bad = np.flatnonzero(denom <= SINGULARITY_EPS)
    if bad.size:
        raise SingularityError(int(bad[0]), float(denom[bad[0]]))
    return height.z_samples / denom


def _solve_axis(p, coef, dt, bc, periodic):
    r = coef / dt**2
    if periodic:
        return solve_cyclic_tridiagonal(-r, 1.0 + 2.0 * r, -r, p)
    x0, xn = bc
    ri = r[1:-1]
    rhs = np.array(p[1:-1], dtype=float)
    rhs[0] += ri[0] * x0
    rhs[-1] += ri[-1] * xn
    inner = solve_tridiagonal(-ri, 1.0 + 2.0 * ri, -ri, rhs)
    return np.concatenate([[x0], inner, [xn]])


def _periodic_second_difference(v, dt):
    return (np.roll(v, 1) - 2.0 * v + np.roll(v, -1)) / dt**2


def solve_com_pendulum_numeric(zmp: ZmpReference, height: HeightProfile, params: RobotParams,
                               bc=None, periodic: bool = False) -> ComTrajectory:
    """CoM from ZMP by discretising ``p = x - c x''`` with ``c = z/(g+z'')``.

    ``bc`` is ``((x_first, x_last), (y_first, y_last))``; it defaults to the
    ZMP end values. With ``periodic=True`` the samples wrap around and no
    boundary values are used.
    """
    n = len(zmp)
    if n < 3:
        raise ValidationError("need at least 3 samples")
    if len(height) != n:
        raise ValidationError(f"height profile has {len(height)} samples, ZMP has {n}")
    if not math.isclose(height.dt, zmp.dt, rel_tol=1e-12):
        raise ValidationError("height profile and ZMP sample periods differ")
    g = params.gravity_g
    coef = pendulum_coefficients(height, g)
    if bc is None:
        bc = ((zmp.px[0], zmp.px[-1]), (zmp.py[0], zmp.py[-1]))
    x = _solve_axis(zmp.px, coef, zmp.dt, bc[0], periodic)
    y = _solve_axis(zmp.py, coef, zmp.dt, bc[1], periodic)
    if periodic:
        ax, ay = _periodic_second_difference(x, zmp.dt), _periodic_second_difference(y, zmp.dt)
    else:
        ax, ay = second_difference(x, zmp.dt), second_difference(y, zmp.dt)
    return ComTrajectory(zmp.dt, x, y, height.z_samples, ax, ay, height.az_samples, g=g)
