"""Large deviation rate functions for the drift and shift estimators.

Rates are extended reals: ``math.inf`` marks points outside the effective
domain. Every function accepts scalars or numpy arrays and returns the same
kind.
"""
from __future__ import annotations

import math

import numpy as np
from scipy import optimize

from .ou_model import ModelParams


def _out(x):
    return float(x) if np.ndim(x) == 0 else x


def rate_joint(params: ModelParams, c, d):
    """Rate function of the pair (theta_hat, gamma_hat) at (c, d)."""
    th, g = params.theta, params.gamma
    c, d = np.broadcast_arrays(np.asarray(c, dtype=float), np.asarray(d, dtype=float))
    nz = c != 0
    safe = np.where(nz, c, 1.0)
    # overflow to inf is the right rate far from the truth
    with np.errstate(over="ignore"):
        shift = 0.5 * (g - d * th / safe) ** 2
        drift = np.where(c <= th / 3, -((th - safe) ** 2) / (4 * safe), 2 * safe - th)
    out = np.where(nz, drift + shift, np.where(d == 0, -th, np.inf))
    return _out(out)


def rate_theta(theta: float, c):
    """Rate function of theta_hat; the two branches meet at c = theta/3."""
    c = np.asarray(c, dtype=float)
    safe = np.where(c == 0, 1.0, c)
    out = np.where(c <= theta / 3, -((safe - theta) ** 2) / (4 * safe), 2 * c - theta)
    return _out(out)


def _gamma_candidates(params: ModelParams, d: float) -> np.ndarray:
    th, g = params.theta, params.gamma
    grid = np.linspace(th - 10.0 * (1.0 + abs(g)), 10.0 * abs(th), 40001)
    if g != 0:
        # the shift penalty vanishes at c = d*theta/gamma; far out the drift part alone exceeds
        # the value (gamma - d)^2/2 attained at c = theta, so only a moderate c* needs resolving
        c_star = d * th / g
        if 0 < abs(c_star) < 1e6 and not grid[0] < c_star < grid[-1]:
            grid = np.union1d(grid, np.linspace(min(0.5 * c_star, 2 * c_star), max(0.5 * c_star, 2 * c_star), 40001))
    return grid[grid != 0]


def rate_gamma(params: ModelParams, d: float, *, return_argmin: bool = False):
    """Rate function of gamma_hat: the infimum over c of the joint rate at (c, d).

    A dense grid brackets every local minimum, each is refined by golden
    section search, and the isolated point c = 0 (finite only for d = 0) is
    compared separately.
    """
    d = float(d)
    f = lambda c: rate_joint(params, c, d)
    grid = _gamma_candidates(params, d)
    vals = rate_joint(params, grid, d)
    best_c, best_v = 0.0, (-params.theta if d == 0 else math.inf)
    mid = vals[1:-1]
    interior = np.flatnonzero(np.isfinite(mid) & (mid <= vals[:-2]) & (mid <= vals[2:])) + 1
    for i in interior:
        left, mid, right = grid[i - 1], grid[i], grid[i + 1]
        if left < 0 < right:
            continue
        try:
            res = optimize.minimize_scalar(f, bracket=(left, mid, right), method="golden", tol=1e-12)
            c_i, v_i = float(res.x), float(res.fun)
        except ValueError:
            c_i, v_i = float(mid), float(vals[i])
        if v_i < best_v:
            best_c, best_v = c_i, v_i
    for j in (0, len(grid) - 1):
        if vals[j] < best_v:
            best_c, best_v = float(grid[j]), float(vals[j])
    return (best_v, best_c) if return_argmin else best_v


def lambda_cgf(params: ModelParams, a, b, c):
    """Limit of the normalized CGF of (X_T/sqrt(T), int X^2/T, int X/T)."""
    th, g = params.theta, params.gamma
    a, b, c = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (a, b, c)))
    inside = b < th * th / 2
    phi = np.sqrt(np.where(inside, th * th - 2 * b, 1.0))
    val = -0.5 * (th + phi + g * g) + 0.5 * a * a / (phi - th) + 0.5 * ((c - th * g) / phi) ** 2
    return _out(np.where(inside, val, np.inf))


def rate_triplet(params: ModelParams, lam, mu, delta):
    """Fenchel-Legendre transform of :func:`lambda_cgf` in closed form."""
    th, g = params.theta, params.gamma
    lam, mu, delta = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (lam, mu, delta)))
    gap = mu - delta**2
    ok = gap > 0
    safe = np.where(ok, gap, 1.0)
    val = (
        (th * th * mu - th * lam**2) / 2
        + (th + g * g + 2 * th * g * delta) / 2
        + (1 + lam**2) ** 2 / (8 * safe)
    )
    return _out(np.where(ok, val, np.inf))


def rate_triplet_numeric(params: ModelParams, lam: float, mu: float, delta: float) -> float:
    """sup over the domain of lam*a + mu*b + delta*c - Lambda(a, b, c), by quasi-Newton ascent.

    The domain constraint b < theta^2/2 is removed by optimizing over
    s = log(phi) with b = (theta^2 - phi^2)/2.
    """
    th, g = params.theta, params.gamma

    def neg(v):
        a, s, c = v
        phi = math.exp(s)
        b = 0.5 * (th * th - phi * phi)
        lam_val = -0.5 * (th + phi + g * g) + 0.5 * a * a / (phi - th) + 0.5 * ((c - th * g) / phi) ** 2
        obj = lam * a + mu * b + delta * c - lam_val
        ga = lam - a / (phi - th)
        gc = delta - (c - th * g) / phi**2
        dlam_dphi = -0.5 - 0.5 * a * a / (phi - th) ** 2 - (c - th * g) ** 2 / phi**3
        gs = phi * (-mu * phi - dlam_dphi)
        return -obj, -np.array([ga, gs, gc])

    x0 = np.array([0.0, math.log(-th), th * g])
    res = optimize.minimize(neg, x0, jac=True, method="BFGS", options={"gtol": 1e-11, "maxiter": 10000})
    # polish: BFGS may stop on the precision-loss criterion slightly short of the optimum
    res = optimize.minimize(neg, res.x, jac=True, method="L-BFGS-B", options={"ftol": 1e-15, "gtol": 1e-12})
    return -float(res.fun)


def contraction_map(lam, mu, delta):
    """The continuous map sending the triplet to the surrogate estimator pair."""
    lam, mu, delta = (np.asarray(v, dtype=float) for v in (lam, mu, delta))
    gap = mu - delta**2
    if np.any(gap <= 0):
        raise ValueError("contraction_map requires mu > delta^2")
    c = (lam**2 - 1) / (2 * gap)
    return _out(c), _out(-delta * c)


def sigma_rate(theta: float, c):
    """Rate function of Sigma_T = S_T/T."""
    c = np.asarray(c, dtype=float)
    safe = np.where(c > 0, c, 1.0)
    return _out(np.where(c > 0, (2 * theta * safe + 1) ** 2 / (8 * safe), np.inf))
