"""Sharp large deviation approximations of P(theta_hat_T >= c).

Each regime of c relative to theta < 0 has its own explicit first-order
formula. The module also solves the implicit tilt equation
L'(a) + H'(a)/T = 0 used when the saddle point sits on the domain boundary,
and computes the c = 0 probability exactly by one-dimensional quadrature over
the Gaussian pair (X_T, Xbar_T).
"""
from __future__ import annotations

import enum
import functools
import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, optimize, special

from .cgf import (
    central_difference,
    restricted_domain,
    restricted_h,
    restricted_h_prime,
    restricted_l_prime,
)
from .exceptions import ConsistencyError, PreAsymptoticError
from .ou_model import ModelParams, joint_moments
from .rates import rate_theta


class Regime(enum.Enum):
    EASY_UPPER = "easy_upper"  # theta < c < theta/3
    LOWER_TAIL = "lower_tail"  # c < theta
    GENERAL = "general"  # c > theta/3, c != 0
    JUNCTION = "junction"  # c = theta/3
    ZERO = "zero"  # c = 0


def classify(theta: float, c: float) -> Regime:
    if not theta < 0:
        raise ValueError("theta must be negative")
    if c == theta:
        raise ValueError("no sharp asymptotics at c = theta, where the rate vanishes")
    if c == 0:
        return Regime.ZERO
    if math.isclose(c, theta / 3, rel_tol=1e-12):
        return Regime.JUNCTION
    if c < theta:
        return Regime.LOWER_TAIL
    if c < theta / 3:
        return Regime.EASY_UPPER
    return Regime.GENERAL


@dataclass(frozen=True)
class SldpReport:
    """First-order tail approximation, without the (1 + o(1)) factor."""

    regime: Regime
    theta: float
    gamma: float
    c: float
    T: float
    event: str
    rate: float
    log_constant: float
    approx_prob: float
    a_c: float | None = None
    sigma_c: float | None = None
    b_c: float | None = None
    a_T: float | None = None

    @property
    def pre_asymptotic(self) -> bool:
        return not self.approx_prob < 1.0

    def as_dict(self) -> dict:
        return {
            "regime": self.regime.value,
            "theta": self.theta,
            "gamma": self.gamma,
            "c": self.c,
            "T": self.T,
            "event": self.event,
            "rate": self.rate,
            "log_constant": self.log_constant,
            "a_c": self.a_c,
            "sigma_c": self.sigma_c,
            "b_c": self.b_c,
            "a_T": self.a_T,
            "approx_prob": self.approx_prob,
            "pre_asymptotic": self.pre_asymptotic,
        }


def prefactor_easy(params: ModelParams, c: float) -> tuple[float, float, float]:
    """(a_c, sigma_c, J(c)) for c < theta/3, c != theta."""
    th, g = params.theta, params.gamma
    if classify(th, c) not in (Regime.EASY_UPPER, Regime.LOWER_TAIL):
        raise ValueError(f"c={c:g} is not in the regime c < theta/3")
    a_c = (c * c - th * th) / (2 * c)
    sigma_c = math.sqrt(-1.0 / (2 * c))
    J = -0.5 * math.log(th * th * (c + th) * (3 * c - th) / (4 * c**4)) + g * g * (c - th) ** 2 / (4 * c * th * th)
    return a_c, sigma_c, J


def prefactor_general(params: ModelParams, c: float) -> tuple[float, float, float, float]:
    """(a_c, sigma_c, K(c), b_c) for c > theta/3, c != 0."""
    th, g = params.theta, params.gamma
    if classify(th, c) is not Regime.GENERAL:
        raise ValueError(f"c={c:g} is not in the regime c > theta/3, c != 0")
    a_c = 2 * (c - th)
    sigma_c = math.sqrt(c * c / (2 * (2 * c - th) ** 3))
    K = -0.5 * math.log(th * th * (c - th) * (3 * c - th) / (4 * c * c * (2 * c - th) ** 2)) - g * g / (th * th) * (2 * c - th)
    b_c = (3 * c - th) / (2 * (2 * c - th))
    return a_c, sigma_c, K, b_c


def junction_constants(theta: float) -> tuple[float, float, float]:
    """(a_theta, b_theta, sigma_theta) at c = theta/3."""
    return -4 * theta / 3, 1 / (3 * theta), math.sqrt(-3 / (2 * theta))


@functools.lru_cache(maxsize=1)
def gamma_quarter() -> float:
    """Gamma(1/4) = 4 * int_0^inf exp(-u^4) du, by adaptive quadrature."""
    val, err = integrate.quad(lambda u: math.exp(-(u**4)), 0.0, np.inf, epsabs=0, epsrel=1e-13)
    return 4.0 * val


def _tilt_equation(params: ModelParams, c: float, T: float):
    return lambda a: restricted_l_prime(params, c, a) + restricted_h_prime(params, c, a) / T


def solve_tilt(params: ModelParams, c: float, T: float, *, xtol: float = 1e-15) -> float:
    """Root a_T of L'(a) + H'(a)/T = 0 inside the domain, next to its right end.

    Only defined for c >= theta/3, c != 0, where the minimizer of L is the
    boundary point 2(c - theta). The root is bracketed by walking left from
    the boundary (where the equation tends to +inf) until it turns negative,
    then refined by bisection.
    """
    th = params.theta
    if classify(th, c) not in (Regime.GENERAL, Regime.JUNCTION):
        raise ValueError(f"solve_tilt needs c >= theta/3 with c != 0, got c={c:g}")
    lo, hi = restricted_domain(th, c)
    f = _tilt_equation(params, c, T)
    scale = max(1.0, abs(hi))
    right = hi - 1e-13 * scale
    if not f(right) > 0:
        raise PreAsymptoticError(f"tilt equation not positive at the boundary a={right:g}")
    width = 1e-12 * scale
    left = None
    span = hi - lo if math.isfinite(lo) else 1e6 * scale
    while width < span:
        cand = hi - width
        if cand > lo and f(cand) < 0:
            left = cand
            break
        width *= 2.0
    if left is None:
        raise PreAsymptoticError(f"no sign change of L' + H'/T on ({lo:g}, {hi:g}) at T={T:g}")
    root = optimize.bisect(f, left, right, xtol=xtol, maxiter=500)
    _check_h_prime(params, c, root, hi)
    return root


def _check_h_prime(params: ModelParams, c: float, a: float, hi: float) -> None:
    # step capped well inside the distance to the boundary, where H' blows up
    h = min(1e-6 * (1.0 + abs(a)), 1e-3 * (hi - a))
    numeric = central_difference(lambda x: restricted_h(params, c, x), a, h)
    exact = restricted_h_prime(params, c, a)
    if abs(numeric - exact) > 1e-5 * max(abs(exact), 1e-300):
        raise ConsistencyError(f"H'({a:g}) analytic {exact!r} vs central difference {numeric!r}")


def zero_log_constant(params: ModelParams, *, printed: bool = False) -> float:
    """Constant in the exponent of the c = 0 approximation.

    The conditional variance of X_T given Xbar_T is -(1 + 1/(2 theta T))/(2 theta),
    and its 1/T correction contributes exp(-1/2), which cancels the exp(1/2)
    from averaging the tilt over Xbar_T. The leading constant is therefore
    gamma^2/theta. ``printed=True`` gives the variant gamma^2/theta + 2, which
    overstates the probability by a factor e^2 (see ``tail_exact_c0``).
    """
    base = params.gamma**2 / params.theta
    return base + 2.0 if printed else base


def tail_approx(
    params: ModelParams,
    c: float,
    T: float,
    *,
    with_tilt: bool = True,
    printed_zero_constant: bool = False,
) -> SldpReport:
    """Explicit first-order approximation to P(theta_hat_T >= c), or to P(theta_hat_T <= c) if c < theta.

    For boundary regimes the tilt a_T is solved as well (``with_tilt``);
    failure to bracket it raises :class:`PreAsymptoticError`.
    """
    th, g = params.theta, params.gamma
    if not T > 0:
        raise ValueError("T must be positive")
    regime = classify(th, c)
    rate = rate_theta(th, c)
    common = dict(regime=regime, theta=th, gamma=g, c=c, T=T, rate=rate)
    root2piT = math.sqrt(2 * math.pi * T)
    if regime in (Regime.EASY_UPPER, Regime.LOWER_TAIL):
        a_c, sigma_c, J = prefactor_easy(params, c)
        prob = math.exp(-T * rate + J) / (a_c * sigma_c * root2piT)
        event = ">="
        if regime is Regime.LOWER_TAIL:
            prob, event = -prob, "<="
        return SldpReport(event=event, log_constant=J, approx_prob=prob, a_c=a_c, sigma_c=sigma_c, **common)
    if regime is Regime.GENERAL:
        a_c, sigma_c, K, b_c = prefactor_general(params, c)
        prob = math.exp(-T * rate + K) / (a_c * sigma_c * root2piT)
        a_T = solve_tilt(params, c, T) if with_tilt else None
        return SldpReport(
            event=">=", log_constant=K, approx_prob=prob, a_c=a_c, sigma_c=sigma_c, b_c=b_c, a_T=a_T, **common
        )
    if regime is Regime.JUNCTION:
        a_th, b_th, s_th = junction_constants(th)
        log_const = g * g * b_th
        prob = (
            math.exp(-T * rate + log_const)
            / (6 * math.pi * T**0.25)
            * gamma_quarter()
            / (math.sqrt(2) * a_th**0.75 * s_th)
        )
        a_T = solve_tilt(params, c, T) if with_tilt else None
        return SldpReport(
            event=">=", log_constant=log_const, approx_prob=prob, a_c=a_th, sigma_c=s_th, b_c=b_th, a_T=a_T, **common
        )
    log_const = zero_log_constant(params, printed=printed_zero_constant)
    prob = math.sqrt(2) * math.exp(-T * rate + log_const) / (root2piT * math.sqrt(-th))
    return SldpReport(event=">=", log_constant=log_const, approx_prob=prob, **common)


def tail_exact_c0(params: ModelParams, T: float, *, epsrel: float = 1e-8) -> float:
    """P(theta_hat_T >= 0) = P(X_T^2 - 2 X_T Xbar_T >= T), by quadrature.

    Conditionally on Xbar_T = y the event is X_T outside the roots
    y -+ sqrt(y^2 + T); the Gaussian two-sided tail is integrated against the
    density of Xbar_T in log space.
    """
    jm = joint_moments(params.theta, params.gamma, T)
    s = math.sqrt(jm.a_T - jm.b_T**2 / jm.c_T)
    sd_y = math.sqrt(jm.c_T)
    slope = jm.b_T / jm.c_T
    log_norm = -0.5 * math.log(2 * math.pi)

    def integrand(u):
        y = jm.mu_T + sd_y * u
        nu = jm.m_T + slope * (y - jm.mu_T)
        r = math.sqrt(y * y + T)
        lo_tail = special.log_ndtr((y - r - nu) / s)
        hi_tail = special.log_ndtr((nu - y - r) / s)
        return math.exp(np.logaddexp(lo_tail, hi_tail) + log_norm - 0.5 * u * u)

    bound = 40.0
    total, err, info = 0.0, 0.0, []
    edges = np.linspace(-bound, bound, 81)
    for left, right in zip(edges[:-1], edges[1:]):
        val, e, *rest = integrate.quad(integrand, left, right, epsabs=0.0, epsrel=epsrel, limit=200, full_output=1)
        if len(rest) > 1:
            info.append(rest[1])
        total += val
        err += e
    if info or not (0.0 < total < 1.0) or err > 100 * epsrel * total:
        raise ArithmeticError(f"quadrature did not converge: value={total!r}, error={err!r}, {info[:1]}")
    return total
