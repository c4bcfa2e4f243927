"""Path functionals and the maximum likelihood estimators of (theta, gamma).

Deterministic time integrals use the trapezoid rule on the simulation grid.
The stochastic integral of X dX is never approximated by a Riemann sum: with
X_0 = 0 and unit diffusion, Ito's formula gives it exactly as (X_T^2 - T)/2.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import ConsistencyError, DegeneratePathError
from .ou_model import ModelParams, SimGrid


@dataclass(frozen=True)
class SuffStats:
    """The path functionals every estimator consumes."""

    x_T: float
    int_x: float
    int_x2: float
    T: float

    @property
    def int_x_dx(self) -> float:
        return 0.5 * (self.x_T**2 - self.T)

    @property
    def xbar(self) -> float:
        return self.int_x / self.T

    @property
    def s_T(self) -> float:
        """Integral of (X - Xbar)^2 dt, clipped at zero against rounding."""
        return max(self.int_x2 - self.int_x**2 / self.T, 0.0)


def suff_stats(path, grid: SimGrid) -> SuffStats:
    path = np.asarray(path, dtype=float)
    if path.shape != (grid.n_steps + 1,):
        raise ValueError(f"path has shape {path.shape}, grid expects {(grid.n_steps + 1,)}")
    if grid.n_steps < 2:
        raise ValueError("suff_stats needs at least two grid steps")
    w = grid.trapezoid_weights()
    return SuffStats(float(path[-1]), float(w @ path), float(w @ path**2), grid.T)


def _denominator(stats: SuffStats) -> float:
    return stats.T * stats.int_x2 - stats.int_x**2


def mle(stats: SuffStats) -> tuple[float, float]:
    """Maximum likelihood pair (theta_hat, gamma_hat)."""
    den = _denominator(stats)
    if not den > 0:
        raise DegeneratePathError("T*int(X^2) - int(X)^2 must be positive")
    theta_hat = (stats.T * stats.int_x_dx - stats.x_T * stats.int_x) / den
    gamma_hat = (stats.x_T * stats.int_x2 - stats.int_x_dx * stats.int_x) / den
    return theta_hat, gamma_hat


def mle_tilde(stats: SuffStats) -> tuple[float, float]:
    """Surrogate pair theta_tilde = int(X dX)/S_T, gamma_tilde = -theta_tilde * Xbar_T.

    It is a continuous function of (X_T/sqrt(T), int(X^2)/T, Xbar_T) and
    differs from the MLE by O(|X_T|/T).
    """
    s_T = stats.s_T
    if not s_T > 0:
        raise DegeneratePathError("S_T vanishes on a constant path")
    theta_tilde = stats.int_x_dx / s_T
    return theta_tilde, -theta_tilde * stats.xbar


def discrepancy(stats: SuffStats, rtol: float = 1e-9) -> tuple[float, float]:
    """(theta_hat - theta_tilde, gamma_hat - gamma_tilde), checked against the closed forms.

    With Sigma_T = S_T/T the differences are -(X_T/T)(Xbar/Sigma_T) and
    (X_T/T)(1 + Xbar^2/Sigma_T).
    """
    th, gh = mle(stats)
    tt, gt = mle_tilde(stats)
    direct = (th - tt, gh - gt)
    sigma = stats.s_T / stats.T
    ratio = stats.x_T / stats.T
    closed = (-ratio * stats.xbar / sigma, ratio * (1.0 + stats.xbar**2 / sigma))
    # relative to the size of the estimates, since the differences may be ~0
    scale = max(abs(th), abs(gh), abs(tt), abs(gt), 1.0)
    for d, c in zip(direct, closed):
        if abs(d - c) > rtol * scale:
            raise ConsistencyError(f"discrepancy identity violated: {d!r} vs {c!r}")
    return closed


def discrepancy_bound(stats: SuffStats, xi: float) -> float | None:
    """Upper bound on the Euclidean estimator gap, or None off the event.

    On {|Xbar_T| <= xi, Sigma_T >= 1/xi} the gap is at most
    sqrt(xi^4 + (1 + xi^3)^2) |X_T|/T, which is below sqrt(3) xi^3 |X_T|/T
    once xi >= 1.25.
    """
    if xi <= 1:
        raise ValueError("xi must exceed 1")
    if abs(stats.xbar) <= xi and stats.s_T / stats.T >= 1.0 / xi:
        return math.sqrt(xi**4 + (1.0 + xi**3) ** 2) * abs(stats.x_T) / stats.T
    return None


def clt_covariance(params: ModelParams) -> np.ndarray:
    """Asymptotic covariance of sqrt(T)(theta_hat - theta, gamma_hat - gamma).

    This is the inverse of the stationary Fisher information per unit time,
    [[m^2 + v, m], [m, 1]] with m = -gamma/theta and v = -1/(2 theta).
    """
    th, g = params.theta, params.gamma
    return np.array([[-2.0 * th, -2.0 * g], [-2.0 * g, 1.0 - 2.0 * g * g / th]])
