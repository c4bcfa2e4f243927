"""Shifted Ornstein-Uhlenbeck process dX = (theta X + gamma) dt + dB, X_0 = 0.

Exact simulation on a grid and the closed-form Gaussian law of the pair
(X_T, mean of X over [0, T]).

The covariance entries a_T(phi), b_T(phi), c_T(phi) are needed for both signs
of phi: phi = theta < 0 gives the law of the process itself, while phi > 0
appears after the Girsanov change of measure used by the cumulant generating
functions (an explosive process). For phi > 0 the entries grow like
exp(2 phi T), so :func:`covariance_scaled` returns them divided by a common
scale factor together with its logarithm.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# below this |x| the closed forms lose digits to cancellation; use Taylor series
_SERIES_CUTOFF = 0.5
# above this x = phi*T the entries are returned divided by exp(2x)
_SCALE_CUTOFF = 2.0


@dataclass(frozen=True)
class ModelParams:
    """True parameters (theta, gamma) with theta < 0."""

    theta: float
    gamma: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.theta) and math.isfinite(self.gamma)):
            raise ValueError("theta and gamma must be finite")
        if not self.theta < 0:
            raise ValueError(f"theta must be strictly negative, got {self.theta}")

    @property
    def stationary_mean(self) -> float:
        return -self.gamma / self.theta

    @property
    def stationary_var(self) -> float:
        return -1.0 / (2.0 * self.theta)


@dataclass(frozen=True)
class SimGrid:
    """Uniform time grid 0 = t_0 < ... < t_n = T."""

    T: float
    n_steps: int

    def __post_init__(self):
        if not (math.isfinite(self.T) and self.T > 0):
            raise ValueError(f"horizon T must be positive, got {self.T}")
        if int(self.n_steps) != self.n_steps or self.n_steps < 1:
            raise ValueError(f"n_steps must be a positive integer, got {self.n_steps}")

    @classmethod
    def from_dt(cls, T: float, dt: float) -> "SimGrid":
        return cls(T, max(1, int(round(T / dt))))

    @property
    def dt(self) -> float:
        return self.T / self.n_steps

    @property
    def times(self) -> np.ndarray:
        return np.linspace(0.0, self.T, self.n_steps + 1)

    def trapezoid_weights(self) -> np.ndarray:
        w = np.full(self.n_steps + 1, self.dt)
        w[0] = w[-1] = 0.5 * self.dt
        return w


@dataclass(frozen=True)
class JointMoments:
    """Mean and covariance of (X_T, Xbar_T)."""

    m_T: float
    mu_T: float
    a_T: float
    b_T: float
    c_T: float

    @property
    def mean(self) -> np.ndarray:
        return np.array([self.m_T, self.mu_T])

    @property
    def cov(self) -> np.ndarray:
        return np.array([[self.a_T, self.b_T], [self.b_T, self.c_T]])

    @property
    def det(self) -> float:
        return self.a_T * self.c_T - self.b_T**2


def _expm1_ratio(y: float) -> float:
    """(e^y - 1)/y, equal to 1 at y = 0."""
    if abs(y) < 1e-4:
        return 1.0 + y / 2.0 + y * y / 6.0 + y**3 / 24.0
    return math.expm1(y) / y


def _mean_ratio(x: float) -> float:
    """(e^x - 1 - x)/x^2, equal to 1/2 at x = 0."""
    if abs(x) < _SERIES_CUTOFF:
        return sum(x ** (n - 2) / math.factorial(n) for n in range(2, 30))
    return (math.expm1(x) - x) / (x * x)


def _var_mean_ratio(x: float) -> float:
    """c_T(phi)/T as a function of x = phi*T; equal to 1/3 at x = 0."""
    if abs(x) < _SERIES_CUTOFF:
        return sum((2.0**n - 2.0) * x ** (n - 2) / math.factorial(n + 1) for n in range(2, 30))
    return (math.expm1(2 * x) / (2 * x) - 2.0 * math.expm1(x) / x + 1.0) / (x * x)


def covariance_scaled(phi: float, T: float) -> tuple[float, float, float, float, float]:
    """Covariance entries of (X_T, Xbar_T) for a centred OU with drift `phi`.

    Returns ``(a, b, c, det, log_scale)`` where the true values are
    ``a*S, b*S, c*S`` and ``det(Gamma_T) = det*S`` with ``S = exp(log_scale)``.
    Note that ``det`` carries one power of S, not two, so that
    ``inv(Gamma_T) = [[c, -b], [-b, a]] / det`` holds with the scaled values.
    """
    if not (math.isfinite(phi) and math.isfinite(T)) or T <= 0:
        raise ValueError(f"need finite phi and T > 0, got phi={phi}, T={T}")
    x = phi * T
    if x > _SCALE_CUTOFF:
        e1, e2 = math.exp(-x), math.exp(-2 * x)
        a = T * (1.0 - e2) / (2 * x)
        b = T * (1.0 - e1) ** 2 / (2 * x * x)
        c = T * ((1.0 - e2) / (2 * x**3) - 2.0 * (e1 - e2) / x**3 + e2 / x**2)
        det = T * T * ((x - 2.0) + 4.0 * e1 - (x + 2.0) * e2) / (2 * x**4)
        return a, b, c, det, 2 * x
    a = T * _expm1_ratio(2 * x)
    b = T * _expm1_ratio(x) ** 2 / 2.0
    c = T * _var_mean_ratio(x)
    return a, b, c, a * c - b * b, 0.0


def covariance(phi: float, T: float) -> np.ndarray:
    """Unscaled 2x2 covariance Gamma_T(phi); overflows for large positive phi*T."""
    a, b, c, _, log_s = covariance_scaled(phi, T)
    return math.exp(log_s) * np.array([[a, b], [b, c]])


def joint_moments(phi: float, gamma: float, T: float) -> JointMoments:
    """Gaussian law of (X_T, Xbar_T) for the process with drift `phi` and shift `gamma`.

    For phi = theta this is the law under the model. The formulas are
    evaluated through series near phi*T = 0, so phi = 0 (Brownian motion
    with drift gamma) is accepted as well.
    """
    if not all(math.isfinite(v) for v in (phi, gamma, T)):
        raise ValueError("joint_moments requires finite inputs")
    if T <= 0:
        raise ValueError(f"horizon T must be positive, got {T}")
    a, b, c, _, log_s = covariance_scaled(phi, T)
    if log_s:
        raise OverflowError(f"phi*T = {phi * T:g} too large for unscaled moments")
    x = phi * T
    m_T = gamma * T * _expm1_ratio(x)
    mu_T = gamma * T * _mean_ratio(x)
    return JointMoments(m_T, mu_T, a, b, c)


def simulate_path(
    params: ModelParams,
    grid: SimGrid,
    seed=None,
    *,
    noise: bool = True,
) -> np.ndarray:
    """Sample X at ``grid.times`` from the exact Gaussian transition.

    ``noise=False`` returns the deterministic mean path, which is used in tests.
    """
    theta, gamma, dt = params.theta, params.gamma, grid.dt
    decay = math.exp(theta * dt)
    shift = gamma * dt * _expm1_ratio(theta * dt)
    sd = math.sqrt(dt * _expm1_ratio(2 * theta * dt))
    n = grid.n_steps
    if noise:
        z = np.random.default_rng(seed).standard_normal(n)
    else:
        z = np.zeros(n)
    x = np.empty(n + 1)
    x[0] = 0.0
    for k in range(n):
        x[k + 1] = decay * x[k] + shift + sd * z[k]
    return x


def simulate_terminal_pair(params: ModelParams, T: float, seed=None, size=None) -> np.ndarray:
    """Exact draws of (X_T, Xbar_T); shape ``(2,)`` or ``(size, 2)``."""
    jm = joint_moments(params.theta, params.gamma, T)
    try:
        chol = np.linalg.cholesky(jm.cov)
    except np.linalg.LinAlgError as exc:
        raise ArithmeticError(f"covariance of (X_T, Xbar_T) is not positive definite at T={T}") from exc
    rng = np.random.default_rng(seed)
    shape = (2,) if size is None else (size, 2)
    z = rng.standard_normal(shape)
    return jm.mean + z @ chol.T
