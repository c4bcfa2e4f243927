"""Large deviations for the drift and shift estimators of the Ornstein-Uhlenbeck process with shift."""
from .cgf import CgfBreakdown, TiltPoint, cgf_exact, det_m_scaled, lambda_cgf_exact, script_h, script_l
from .estimators import SuffStats, clt_covariance, discrepancy, discrepancy_bound, mle, mle_tilde, suff_stats
from .exceptions import ConsistencyError, DegeneratePathError, DomainError, PreAsymptoticError
from .montecarlo import McConfig, TailEstimate, estimate_tail, estimate_tail_is, exp_equiv_probe, ldp_slope
from .ou_model import ModelParams, SimGrid, joint_moments, simulate_path, simulate_terminal_pair
from .rates import (
    contraction_map,
    lambda_cgf,
    rate_gamma,
    rate_joint,
    rate_theta,
    rate_triplet,
    rate_triplet_numeric,
    sigma_rate,
)
from .sldp import Regime, SldpReport, classify, solve_tilt, tail_approx, tail_exact_c0
from .spectral import ChaosDecomposition, decompose, series_cgf, spectral_limit, spectral_moment

__all__ = [
    "CgfBreakdown",
    "ChaosDecomposition",
    "ConsistencyError",
    "DegeneratePathError",
    "DomainError",
    "McConfig",
    "ModelParams",
    "PreAsymptoticError",
    "Regime",
    "SimGrid",
    "SldpReport",
    "SuffStats",
    "TailEstimate",
    "TiltPoint",
    "cgf_exact",
    "classify",
    "clt_covariance",
    "contraction_map",
    "decompose",
    "det_m_scaled",
    "discrepancy",
    "discrepancy_bound",
    "estimate_tail",
    "estimate_tail_is",
    "exp_equiv_probe",
    "joint_moments",
    "lambda_cgf",
    "lambda_cgf_exact",
    "ldp_slope",
    "mle",
    "mle_tilde",
    "rate_gamma",
    "rate_joint",
    "rate_theta",
    "rate_triplet",
    "rate_triplet_numeric",
    "script_h",
    "script_l",
    "series_cgf",
    "sigma_rate",
    "simulate_path",
    "simulate_terminal_pair",
    "solve_tilt",
    "spectral_limit",
    "spectral_moment",
    "suff_stats",
    "tail_approx",
    "tail_exact_c0",
]
