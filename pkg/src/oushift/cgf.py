"""Normalized cumulant generating functions of the quadratic path functionals.

Two finite-horizon CGFs are computed exactly:

* ``L_T(a, b) = (1/T) log E exp(a int (X - Xbar) dX + b S_T)`` together with its
  limit ``L``, the first correction ``H`` and the remainder
  ``R_T = T^2 (L_T - L - H/T)``;
* ``Lambda_T(a, b, c)``, the CGF of ``(X_T/sqrt(T), int X^2/T, Xbar_T)``.

After the Girsanov change of measure to an OU process with drift
``phi = sqrt(theta^2 - 2b)`` both reduce to ``log E exp(-V'JV/2 + u'V)`` for a
centred Gaussian vector ``V = (X_T, Xbar_T)`` with covariance ``Gamma_T(phi)``.
That Gaussian integral is evaluated by 2x2 linear algebra on
``inv(Gamma_T) + J``, which never forms the exponentially large entries of
``Gamma_T`` itself.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import DomainError, PreAsymptoticError
from .ou_model import ModelParams, covariance_scaled


@dataclass(frozen=True)
class TiltPoint:
    """A point (a, b) of the effective domain of L, with phi(b) and tau(a, b)."""

    a: float
    b: float
    phi: float
    tau: float

    @classmethod
    def make(cls, params: ModelParams, a: float, b: float) -> "TiltPoint":
        th = params.theta
        disc = th * th - 2.0 * b
        if not disc > 0:
            raise DomainError(f"need theta^2 - 2b > 0, got {disc:g} at b={b:g}")
        phi = math.sqrt(disc)
        tau = phi - (a + th)
        if not tau > 0:
            raise DomainError(f"need a + theta < sqrt(theta^2 - 2b), i.e. tau > 0; got tau={tau:g}")
        return cls(float(a), float(b), phi, tau)


@dataclass(frozen=True)
class CgfBreakdown:
    """L_T(a, b) = leading + correction/T + remainder/T^2."""

    T: float
    value_exact: float
    leading: float
    correction: float
    remainder: float
    log_det_m: float


def script_l(params: ModelParams, a: float, b: float) -> float:
    """Pointwise limit L(a, b) = -(a + theta + phi(b))/2."""
    p = TiltPoint.make(params, a, b)
    return -0.5 * (a + params.theta + p.phi)


def script_h(params: ModelParams, a: float, b: float) -> float:
    """First-order correction H(a, b) in the expansion of L_T."""
    th, g = params.theta, params.gamma
    p = TiltPoint.make(params, a, b)
    return -0.5 * math.log(p.tau * th * th / (2.0 * p.phi**3)) - g * g * (a + th + p.phi) / (2.0 * th * th)


def _gaussian_log_mgf(J: np.ndarray, u: np.ndarray, phi: float, T: float) -> tuple[float, float]:
    """log E exp(-V'JV/2 + u'V) for V ~ N(0, Gamma_T(phi)), and log det(I + J Gamma_T).

    Uses det(I + J Gamma) = det(Gamma) det(inv(Gamma) + J) and
    Gamma inv(I + J Gamma) = inv(inv(Gamma) + J).
    """
    a, b, c, det_s, log_s = covariance_scaled(phi, T)
    precision = np.array([[c, -b], [-b, a]]) / det_s
    P = precision + J
    det_p = P[0, 0] * P[1, 1] - P[0, 1] * P[1, 0]
    if not (P[0, 0] > 0 and det_p > 0):
        raise PreAsymptoticError(
            f"E exp(-V'JV/2) is infinite at T={T:g}: inv(Gamma_T) + J is not positive definite"
        )
    log_det_m = math.log(det_s) + log_s + math.log(det_p)
    quad = float(u @ np.linalg.solve(P, u))
    return -0.5 * log_det_m + 0.5 * quad, log_det_m


def _l_exact(params: ModelParams, p: TiltPoint, T: float) -> tuple[float, float]:
    th, g = params.theta, params.gamma
    J = np.array([[p.tau, p.a], [p.a, 2.0 * p.b * T]])
    u = g * np.array([1.0, -th * T])
    log_mgf, log_det_m = _gaussian_log_mgf(J, u, p.phi, T)
    return 0.5 * (p.tau - g * g) + log_mgf / T, log_det_m


def cgf_exact(params: ModelParams, a: float, b: float, T: float) -> CgfBreakdown:
    """Exact L_T(a, b) and its split into leading term, correction and remainder.

    Raises :class:`PreAsymptoticError` when the expectation is infinite at this
    horizon; the expectation is finite for all large T once (a, b) is in the
    domain of L.
    """
    if not T > 0:
        raise ValueError(f"horizon T must be positive, got {T}")
    p = TiltPoint.make(params, a, b)
    value, log_det_m = _l_exact(params, p, T)
    leading = script_l(params, a, b)
    correction = script_h(params, a, b)
    remainder = T * T * (value - leading - correction / T)
    return CgfBreakdown(T, value, leading, correction, remainder, log_det_m)


def det_m_scaled(params: ModelParams, a: float, b: float, T: float) -> float:
    """det M_T(a, b) * exp(-2 phi T); tends to tau theta^2 / (2 phi^3)."""
    p = TiltPoint.make(params, a, b)
    _, log_det_m = _l_exact(params, p, T)
    return math.exp(log_det_m - 2.0 * p.phi * T)


def lambda_cgf_exact(params: ModelParams, a: float, b: float, c: float, T: float) -> float:
    """Exact Lambda_T(a, b, c) = (1/T) log E exp(a sqrt(T) X_T + b int X^2 + c int X)."""
    th, g = params.theta, params.gamma
    if not T > 0:
        raise ValueError(f"horizon T must be positive, got {T}")
    disc = th * th - 2.0 * b
    if not disc > 0:
        raise DomainError(f"need b < theta^2/2, got b={b:g}")
    phi = math.sqrt(disc)
    J = np.array([[phi - th, 0.0], [0.0, 0.0]])
    u = np.array([a * math.sqrt(T) + g, T * (c - th * g)])
    log_mgf, _ = _gaussian_log_mgf(J, u, phi, T)
    return 0.5 * (phi - th - g * g) + log_mgf / T


# One-parameter restriction a -> (a, -c a): P(theta_hat >= c) = P(Z_T(a, -c a) >= 0) for a > 0.


def restricted_domain(theta: float, c: float) -> tuple[float, float]:
    """Open interval of a with (a, -c a) in the domain of L."""
    lo = -theta * theta / (2 * c) if c > 0 else -math.inf
    hi = -theta * theta / (2 * c) if c <= theta / 2 else 2 * (c - theta)
    return lo, hi


def _restricted_phi(params: ModelParams, c: float, a: float) -> float:
    lo, hi = restricted_domain(params.theta, c)
    if not lo < a < hi:
        raise DomainError(f"a={a:g} outside ({lo:g}, {hi:g}) for c={c:g}")
    return math.sqrt(params.theta**2 + 2 * a * c)


def restricted_l(params: ModelParams, c: float, a: float) -> float:
    phi = _restricted_phi(params, c, a)
    return -0.5 * (a + params.theta + phi)


def restricted_h(params: ModelParams, c: float, a: float) -> float:
    th, g = params.theta, params.gamma
    phi = _restricted_phi(params, c, a)
    tau = phi - a - th
    return -0.5 * math.log(tau * th * th / (2 * phi**3)) - g * g * (a + th + phi) / (2 * th * th)


def restricted_l_prime(params: ModelParams, c: float, a: float) -> float:
    phi = _restricted_phi(params, c, a)
    return -0.5 * (1.0 + c / phi)


def restricted_l_second(params: ModelParams, c: float, a: float) -> float:
    phi = _restricted_phi(params, c, a)
    return 0.5 * c * c / phi**3


def restricted_h_prime(params: ModelParams, c: float, a: float) -> float:
    th, g = params.theta, params.gamma
    phi = _restricted_phi(params, c, a)
    dphi = c / phi
    tau = phi - a - th
    return -0.5 * ((dphi - 1.0) / tau - 3.0 * dphi / phi) - g * g * (1.0 + dphi) / (2 * th * th)


def central_difference(f, x: float, h: float | None = None) -> float:
    h = 1e-6 * (1.0 + abs(x)) if h is None else h
    return (f(x + h) - f(x - h)) / (2 * h)
