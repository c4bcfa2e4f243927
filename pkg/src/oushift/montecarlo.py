"""Monte Carlo estimation of tail probabilities, CGFs and estimator laws.

Paths are generated from the exact OU transition and reduced on the fly to
the sufficient statistics by a compiled kernel. The centred process Y is
simulated once and the shift is added afterwards through the deterministic
mean path m, so one batch of paths serves every value of gamma:

    X = Y + gamma * m,   int X^2 = int Y^2 + 2 gamma int m Y + gamma^2 int m^2.

Randomness comes in blocks of consecutive paths, each block with its own
stream spawned from the master seed by block index. Results therefore depend
on (seed, block_size) but not on the number of worker processes.
"""
from __future__ import annotations

import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numba
import numpy as np

from .cgf import TiltPoint
from .exceptions import DegeneratePathError
from .ou_model import ModelParams, SimGrid, _expm1_ratio
from .sldp import Regime, classify

_STEP_CHUNK = 4096


@dataclass(frozen=True)
class McConfig:
    """Monte Carlo settings; the grid is SimGrid.from_dt(T, dt) for each horizon T."""

    n_paths: int
    dt: float = 1e-2
    seed: int = 0
    estimator: str = "mle"
    tilt: float | None = None
    workers: int = 1
    block_size: int = 1000

    def __post_init__(self):
        if int(self.n_paths) != self.n_paths or self.n_paths < 100:
            raise ValueError(f"n_paths must be an integer >= 100, got {self.n_paths}")
        if not (math.isfinite(self.dt) and self.dt > 0):
            raise ValueError(f"dt must be positive, got {self.dt}")
        if self.estimator not in ("mle", "tilde"):
            raise ValueError("estimator must be 'mle' or 'tilde'")
        if self.tilt is not None and not self.tilt < 0:
            raise ValueError(f"tilt must be negative for stable tilted dynamics, got {self.tilt}")
        if self.workers < 1 or self.block_size < 1:
            raise ValueError("workers and block_size must be positive")

    def grid(self, T: float) -> SimGrid:
        return SimGrid.from_dt(T, self.dt)


@dataclass(frozen=True)
class TailEstimate:
    p_hat: float
    stderr: float
    n_paths: int
    method: str
    ess: float | None = None
    warning: str | None = None

    @property
    def rel_err(self) -> float:
        return self.stderr / self.p_hat if self.p_hat > 0 else math.inf

    def as_dict(self) -> dict:
        return {
            "p_hat": self.p_hat,
            "stderr": self.stderr,
            "n_paths": self.n_paths,
            "method": self.method,
            "ess": self.ess,
            "warning": self.warning,
        }


@numba.njit(cache=True)
def _advance(z, decay, sd, m, k0, state):
    # state columns: Y, sum(Y_k + Y_{k+1}), sum(Y_k^2 + Y_{k+1}^2), sum(m_k Y_k + m_{k+1} Y_{k+1})
    n_paths, n_steps = z.shape
    for i in range(n_paths):
        y = state[i, 0]
        s1 = state[i, 1]
        s2 = state[i, 2]
        sm = state[i, 3]
        for k in range(n_steps):
            yn = decay * y + sd * z[i, k]
            s1 += y + yn
            s2 += y * y + yn * yn
            sm += m[k0 + k] * y + m[k0 + k + 1] * yn
            y = yn
        state[i, 0] = y
        state[i, 1] = s1
        state[i, 2] = s2
        state[i, 3] = sm


def _unit_mean_path(drift: float, grid: SimGrid) -> np.ndarray:
    # mean of the process with shift 1, via the same recursion as the simulator
    decay = math.exp(drift * grid.dt)
    step = grid.dt * _expm1_ratio(drift * grid.dt)
    m = np.empty(grid.n_steps + 1)
    m[0] = 0.0
    for k in range(grid.n_steps):
        m[k + 1] = decay * m[k] + step
    return m


def _block(args) -> np.ndarray:
    drift, T, n_steps, n, seed, block = args
    grid = SimGrid(T, n_steps)
    dt = grid.dt
    decay = math.exp(drift * dt)
    sd = math.sqrt(dt * _expm1_ratio(2 * drift * dt))
    m = _unit_mean_path(drift, grid)
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(block,)))
    state = np.zeros((n, 4))
    for k0 in range(0, n_steps, _STEP_CHUNK):
        z = rng.standard_normal((n, min(_STEP_CHUNK, n_steps - k0)))
        _advance(z, decay, sd, m, k0, state)
    state[:, 1:] *= 0.5 * dt
    return state


@dataclass(frozen=True)
class PathBatch:
    """Sufficient statistics of the centred process for a batch of paths.

    ``y`` has columns (Y_T, int Y, int Y^2, int m Y), where m is the mean path
    for shift 1 under the simulation drift.
    """

    drift: float
    grid: SimGrid
    y: np.ndarray
    m_T: float
    int_m: float
    int_m2: float

    @property
    def n_paths(self) -> int:
        return self.y.shape[0]

    def suff(self, gamma: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Arrays (X_T, int X, int X^2) for the process with shift ``gamma``."""
        y_T, iy, iy2, imy = self.y.T
        x_T = y_T + gamma * self.m_T
        int_x = iy + gamma * self.int_m
        int_x2 = iy2 + 2.0 * gamma * imy + gamma * gamma * self.int_m2
        return x_T, int_x, int_x2


def simulate_batch(drift: float, T: float, cfg: McConfig) -> PathBatch:
    """Simulate ``cfg.n_paths`` centred OU paths with drift parameter ``drift``."""
    if not drift < 0:
        raise ValueError("simulation drift must be negative")
    grid = cfg.grid(T)
    sizes = [min(cfg.block_size, cfg.n_paths - s) for s in range(0, cfg.n_paths, cfg.block_size)]
    tasks = [(drift, grid.T, grid.n_steps, n, cfg.seed, b) for b, n in enumerate(sizes)]
    if cfg.workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            blocks = list(pool.map(_block, tasks))
    else:
        blocks = [_block(t) for t in tasks]
    m = _unit_mean_path(drift, grid)
    w = grid.trapezoid_weights()
    return PathBatch(drift, grid, np.concatenate(blocks), float(m[-1]), float(w @ m), float(w @ m**2))


def estimator_arrays(x_T, int_x, int_x2, T: float, estimator: str = "mle"):
    """Vectorized (theta, gamma) estimates; ``estimator`` is 'mle' or 'tilde'."""
    ixdx = 0.5 * (x_T**2 - T)
    if estimator == "mle":
        den = T * int_x2 - int_x**2
        if np.any(den <= 0):
            raise DegeneratePathError("T*int(X^2) - int(X)^2 must be positive on every path")
        return (T * ixdx - x_T * int_x) / den, (x_T * int_x2 - ixdx * int_x) / den
    s_T = int_x2 - int_x**2 / T
    if np.any(s_T <= 0):
        raise DegeneratePathError("S_T vanishes on some path")
    theta = ixdx / s_T
    return theta, -theta * int_x / T


def sample_estimators(params: ModelParams, T: float, cfg: McConfig) -> tuple[np.ndarray, np.ndarray]:
    """Draws of (theta_hat, gamma_hat) at horizon T."""
    batch = simulate_batch(params.theta, T, cfg)
    return estimator_arrays(*batch.suff(params.gamma), batch.grid.T, cfg.estimator)


def _event(theta_est, c: float, lower: bool, gamma_est=None, gamma_window=None):
    hit = theta_est <= c if lower else theta_est >= c
    if gamma_window is not None:
        d, delta = gamma_window
        hit &= np.abs(gamma_est - d) < delta
    return hit


def estimate_tail(
    params: ModelParams, c: float, T: float, cfg: McConfig, *, lower: bool = False, gamma_window=None
) -> TailEstimate:
    """Plain MC estimate of P(theta_hat_T >= c), or of P(theta_hat_T <= c) when ``lower``.

    ``gamma_window=(d, delta)`` intersects the event with |gamma_hat - d| < delta.
    """
    th_est, g_est = sample_estimators(params, T, cfg)
    hit = _event(th_est, c, lower, g_est, gamma_window)
    n = hit.size
    p = float(np.count_nonzero(hit)) / n
    return TailEstimate(p, math.sqrt(p * (1.0 - p) / n), n, "plain")


def log_weights(params: ModelParams, tilt: float, x_T, int_x, int_x2, T: float):
    """log dP_(theta,gamma)/dP_(tilt,0) along each path (unit diffusion Girsanov ratio)."""
    th, g = params.theta, params.gamma
    ixdx = 0.5 * (x_T**2 - T)
    return (th - tilt) * ixdx + g * x_T - 0.5 * ((th * th - tilt * tilt) * int_x2 + 2 * th * g * int_x + g * g * T)


def default_tilt(params: ModelParams, c: float) -> float:
    """Drift under which the estimator concentrates at c; only for c < 0."""
    if not c < 0:
        raise ValueError("importance sampling needs c < 0 (the tilted process must be stable)")
    return c


def estimate_tail_is(
    params: ModelParams, c: float, T: float, cfg: McConfig, *, lower: bool = False, gamma_window=None
) -> TailEstimate:
    """Importance-sampled estimate, simulating under drift ``cfg.tilt`` and shift 0.

    The estimate is the unnormalized mean of weight * indicator with its sample
    standard error. An effective sample size below 1% of the paths is flagged.
    """
    tilt = cfg.tilt if cfg.tilt is not None else default_tilt(params, c)
    batch = simulate_batch(tilt, T, cfg)
    x_T, int_x, int_x2 = batch.suff(0.0)
    Tg = batch.grid.T
    th_est, g_est = estimator_arrays(x_T, int_x, int_x2, Tg, cfg.estimator)
    hit = _event(th_est, c, lower, g_est, gamma_window)
    w = np.exp(log_weights(params, tilt, x_T, int_x, int_x2, Tg))
    vals = np.where(hit, w, 0.0)
    n = vals.size
    p = float(np.mean(vals))
    se = float(np.std(vals, ddof=1)) / math.sqrt(n)
    ess = float(np.sum(w) ** 2 / np.sum(w * w))
    warning = None
    if ess < 0.01 * n:
        warning = f"effective sample size {ess:.1f} is below 1% of {n} paths"
        warnings.warn(warning, RuntimeWarning, stacklevel=2)
    return TailEstimate(p, se, n, "tilted", ess, warning)


@dataclass(frozen=True)
class SlopeEstimate:
    T: tuple[float, ...]
    p_hat: tuple[float, ...]
    values: tuple[float, ...]
    limit: float
    log_coef: float
    dropped: tuple[float, ...] = field(default=())


def _log_coefficient(theta: float, c: float) -> float:
    # power of T in the polynomial prefactor: T^(-1/2), or T^(-1/4) at the junction
    if c <= theta:
        return 0.0
    return 0.25 if classify(theta, c) is Regime.JUNCTION else 0.5


def ldp_slope(
    params: ModelParams,
    c: float,
    T_list,
    cfg: McConfig,
    *,
    importance: bool = False,
    gamma_window=None,
) -> SlopeEstimate:
    """Empirical -(1/T) log p_hat per horizon and an extrapolated limit.

    The limit is the least-squares intercept I of
    v(T) = I + alpha/T + kappa log(T)/T, with kappa fixed by the prefactor of
    the regime and alpha fitted.
    """
    T_list = [float(t) for t in T_list]
    if len(T_list) < 3 or any(b <= a for a, b in zip(T_list, T_list[1:])):
        raise ValueError("T_list must be increasing with at least three horizons")
    est = estimate_tail_is if importance else estimate_tail
    kept, probs, vals, dropped = [], [], [], []
    for T in T_list:
        p = est(params, c, T, cfg, gamma_window=gamma_window).p_hat
        if p <= 0:
            warnings.warn(f"no hits at T={T:g}; horizon dropped", RuntimeWarning, stacklevel=2)
            dropped.append(T)
            continue
        kept.append(T)
        probs.append(p)
        vals.append(-math.log(p) / T)
    kappa = _log_coefficient(params.theta, c)
    if len(kept) >= 2:
        t = np.asarray(kept)
        design = np.column_stack([np.ones_like(t), 1.0 / t])
        target = np.asarray(vals) - kappa * np.log(t) / t
        coef, *_ = np.linalg.lstsq(design, target, rcond=None)
        limit = float(coef[0])
    else:
        limit = math.nan
    return SlopeEstimate(tuple(kept), tuple(probs), tuple(vals), limit, kappa, tuple(dropped))


def exp_equiv_probe(params: ModelParams, T_list, cfg: McConfig, *, eps=(0.1, 0.05), xi: float = 2.0) -> list[dict]:
    """Per-horizon exceedance counts of |V_hat - V_tilde| > eps with per-path identity checks.

    Each row also reports the largest relative violation of the closed-form
    discrepancy identities and the number of paths breaking the bound
    sqrt(3) xi^3 |X_T|/T on the event {|Xbar| <= xi, Sigma >= 1/xi}.
    """
    rows = []
    for T in T_list:
        batch = simulate_batch(params.theta, T, cfg)
        x_T, int_x, int_x2 = batch.suff(params.gamma)
        Tg = batch.grid.T
        th, gh = estimator_arrays(x_T, int_x, int_x2, Tg, "mle")
        tt, gt = estimator_arrays(x_T, int_x, int_x2, Tg, "tilde")
        xbar = int_x / Tg
        sigma = (int_x2 - int_x**2 / Tg) / Tg
        ratio = x_T / Tg
        closed_t = -ratio * xbar / sigma
        closed_g = ratio * (1.0 + xbar**2 / sigma)
        scale = np.maximum.reduce([np.abs(th), np.abs(gh), np.abs(tt), np.abs(gt), np.ones_like(th)])
        dev = np.maximum(np.abs(th - tt - closed_t), np.abs(gh - gt - closed_g)) / scale
        gap = np.hypot(th - tt, gh - gt)
        on_event = (np.abs(xbar) <= xi) & (sigma >= 1.0 / xi)
        violations = int(np.count_nonzero(on_event & (gap > math.sqrt(3.0) * xi**3 * np.abs(x_T) / Tg)))
        for e in eps:
            count = int(np.count_nonzero(gap > e))
            rows.append(
                {
                    "T": float(T),
                    "eps": float(e),
                    "exceedances": count,
                    "fraction": count / gap.size,
                    "identity_max_rel_dev": float(dev.max()),
                    "bound_violations": violations,
                    "n_paths": int(gap.size),
                }
            )
    return rows


@dataclass(frozen=True)
class CgfEstimate:
    """(1/T) log of a sample mean of exp(values), with a delta-method standard error."""

    value: float
    stderr: float
    n_paths: int


def log_mean_exp(values, T: float) -> CgfEstimate:
    values = np.asarray(values, dtype=float)
    shift = float(values.max())
    w = np.exp(values - shift)
    mean = float(np.mean(w))
    se = float(np.std(w, ddof=1)) / math.sqrt(w.size)
    return CgfEstimate((shift + math.log(mean)) / T, se / mean / T, w.size)


def mc_cgf(params: ModelParams, a: float, b: float, T: float, cfg: McConfig) -> CgfEstimate:
    """MC estimate of L_T(a, b) = (1/T) log E exp(a int (X - Xbar) dX + b S_T)."""
    TiltPoint.make(params, a, b)
    batch = simulate_batch(params.theta, T, cfg)
    x_T, int_x, int_x2 = batch.suff(params.gamma)
    Tg = batch.grid.T
    z = a * (0.5 * (x_T**2 - Tg) - x_T * int_x / Tg) + b * (int_x2 - int_x**2 / Tg)
    return log_mean_exp(z, Tg)


def mc_lambda_cgf(params: ModelParams, a: float, b: float, c: float, T: float, cfg: McConfig) -> CgfEstimate:
    """MC estimate of Lambda_T(a, b, c) = (1/T) log E exp(a sqrt(T) X_T + b int X^2 + c int X)."""
    batch = simulate_batch(params.theta, T, cfg)
    x_T, int_x, int_x2 = batch.suff(params.gamma)
    Tg = batch.grid.T
    return log_mean_exp(a * math.sqrt(Tg) * x_T + b * int_x2 + c * int_x, Tg)
