"""Discretized Wiener chaos decomposition of Z_T(a, b) = a int (X - Xbar) dX + b S_T.

On a grid the Ito identity turns Z_T into a quadratic form X'QX - aT/2 in the
path values, with trapezoid weights w:

    Q = (a/2) e e' - (a/2T)(e w' + w e') + b diag(w) - (b/T) w w',

where e picks out X_T. Writing X = m + Y with Y the centred OU (covariance
C = LL') gives Z_T = E[Z_T] + sum_k alpha_k (eps_k^2 - 1) + beta_k eps_k with
alpha the eigenvalues of L'QL and beta the linear part rotated into its
eigenbasis. The value at t = 0 is dropped since X_0 = 0.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, linalg

from .exceptions import ConsistencyError, DomainError
from .ou_model import ModelParams, SimGrid


@dataclass(frozen=True)
class ChaosDecomposition:
    """Z_T(a, b) = mean + sum alpha_k (eps_k^2 - 1) + beta_k eps_k.

    ``alphas`` are sorted by decreasing absolute value; ``bound_alpha`` and
    ``bound_beta`` record max|alpha_k| and sum beta_k^2.
    """

    a: float
    b: float
    mean: float
    alphas: np.ndarray
    betas: np.ndarray
    grid: SimGrid

    @property
    def bound_alpha(self) -> float:
        return float(np.max(np.abs(self.alphas))) if self.alphas.size else 0.0

    @property
    def bound_beta(self) -> float:
        return math.fsum(self.betas**2)

    @property
    def radius(self) -> float:
        """Half-width 1/(2 max|alpha|) of the strip where the series converges."""
        A = self.bound_alpha
        return math.inf if A == 0 else 1.0 / (2.0 * A)

    def sample(self, size: int, seed=None) -> np.ndarray:
        """Draws of Z_T rebuilt from independent standard normals."""
        eps = np.random.default_rng(seed).standard_normal((size, self.alphas.size))
        return self.mean + (eps**2 - 1.0) @ self.alphas + eps @ self.betas


def _ou_covariance(theta: float, t: np.ndarray) -> np.ndarray:
    # (e^{theta|t-s|} - e^{theta(t+s)}) / (-2 theta), built in place
    C = np.abs(np.subtract.outer(t, t))
    C *= theta
    np.exp(C, out=C)
    C -= np.exp(theta * np.add.outer(t, t))
    C /= -2.0 * theta
    return C


def decompose(params: ModelParams, a: float, b: float, grid: SimGrid) -> ChaosDecomposition:
    """Chaos coefficients of Z_T(a, b) on ``grid``.

    Any real (a, b) is accepted: the decomposition exists for every pair, and
    only the series CGF needs (a, b) in the domain of L.
    """
    th, g = params.theta, params.gamma
    T = grid.T
    t = grid.times[1:]
    w = grid.trapezoid_weights()[1:]
    n = t.size

    C = _ou_covariance(th, t)
    try:
        L = linalg.cholesky(C, lower=True, overwrite_a=True, check_finite=False)
    except linalg.LinAlgError as exc:
        raise ArithmeticError("OU covariance on the grid is not positive definite") from exc
    del C

    u = L[-1, :].copy()  # L' e
    v = L.T @ w  # L' w
    K = (L.T * w) @ L
    K *= b
    K += (0.5 * a) * np.outer(u, u)
    K -= (0.5 * a / T) * (np.outer(u, v) + np.outer(v, u))
    K -= (b / T) * np.outer(v, v)
    if not np.allclose(K, K.T, rtol=0, atol=1e-12 * max(1.0, np.abs(K).max())):
        raise ConsistencyError("quadratic form is not symmetric")
    trace = float(np.trace(K))

    m = g * np.expm1(th * t) / th
    wm = float(w @ m)
    Qm = b * w * m
    Qm[-1] += 0.5 * a * m[-1] - 0.5 * a / T * wm
    Qm -= (0.5 * a / T * m[-1] + b / T * wm) * w
    mean = float(m @ Qm) - 0.5 * a * T + trace

    try:
        if g == 0:
            alphas = linalg.eigvalsh(K, overwrite_a=True, check_finite=False)
            betas = np.zeros(n)
        else:
            alphas, U = linalg.eigh(K, overwrite_a=True, check_finite=False)
            betas = U.T @ (2.0 * (L.T @ Qm))
    except linalg.LinAlgError as exc:
        raise ArithmeticError(f"eigen-solver failed: {exc}") from exc

    # E[Z^2] = sum alpha_k E[eps^2 - 1] = 0 requires sum alpha = tr(QC)
    if abs(math.fsum(alphas) - trace) > 1e-8 * max(1.0, np.abs(alphas).sum()):
        raise ConsistencyError("eigenvalues do not reproduce the trace of the quadratic form")
    order = np.argsort(-np.abs(alphas), kind="stable")
    return ChaosDecomposition(float(a), float(b), mean, alphas[order], betas[order], grid)


def series_cgf(decomp: ChaosDecomposition, x: float) -> float:
    """(1/T) log E exp(x Z_T) summed from the chaos coefficients."""
    if not abs(x) < decomp.radius:
        raise DomainError(f"|x|={abs(x):g} is outside the convergence radius {decomp.radius:g}")
    T = decomp.grid.T
    ax = 2.0 * x * decomp.alphas
    log_part = math.fsum(np.log1p(-ax) + ax)
    lin_part = math.fsum((x * decomp.betas) ** 2 / (1.0 - ax))
    return (x * decomp.mean - 0.5 * log_part + 0.5 * lin_part) / T


def _check_power(p) -> int:
    if int(p) != p or p < 2:
        raise ValueError(f"only integer moments p >= 2 are supported, got {p}")
    return int(p)


def spectral_moment(decomp: ChaosDecomposition, p: int) -> float:
    """(1/T) sum_k alpha_k^p."""
    p = _check_power(p)
    return math.fsum(decomp.alphas**p) / decomp.grid.T


def spectral_limit(theta: float, b: float, p: int) -> float:
    """(1/2 pi) int (b g(x))^p dx with g(x) = 1/(theta^2 + x^2)."""
    p = _check_power(p)
    k = abs(theta)
    if p == 2:
        return b * b / (4.0 * k**3)
    if p == 3:
        return 3.0 * b**3 / (16.0 * k**5)
    val, _ = integrate.quad(lambda x: (b / (theta * theta + x * x)) ** p, -np.inf, np.inf, epsabs=0, epsrel=1e-12)
    return val / (2.0 * math.pi)


def eigen_count(decomp: ChaosDecomposition, eps: float) -> int:
    """q_T(eps): number of coefficients with |alpha_k| > eps."""
    return int(np.count_nonzero(np.abs(decomp.alphas) > eps))


def exceedance_probability(decomp: ChaosDecomposition, threshold: float = 0.0) -> float:
    """P(Z_T > threshold) by Gil-Pelaez inversion of the chaos characteristic function.

    Accurate to about 1e-10 in absolute terms, so it is an oracle for
    moderate tail probabilities only.
    """
    shift = decomp.mean - threshold
    al, be = decomp.alphas, decomp.betas

    def integrand(u):
        z = 1.0 - 2j * u * al
        log_cf = 1j * u * shift + np.sum(-0.5 * np.log(z) - 1j * u * al - 0.5 * (u * be) ** 2 / z)
        return np.exp(log_cf).imag / u

    val, err = integrate.quad(integrand, 0.0, np.inf, limit=4000, epsabs=1e-13, epsrel=1e-10)
    if err > 1e-9:
        raise ArithmeticError(f"Gil-Pelaez integral did not converge (error estimate {err:g})")
    return 0.5 + val / math.pi
