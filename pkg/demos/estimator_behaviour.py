"""Estimators on simulated paths.

Draws many paths in parallel-safe blocks, then shows the central limit
covariance of the maximum likelihood pair and how fast the surrogate
estimator (a smooth function of three path statistics) merges with it.
"""
import math

import numpy as np

from oushift import McConfig, ModelParams, clt_covariance
from oushift.montecarlo import sample_estimators

params = ModelParams(theta=-2.0, gamma=1.0)
T = 100.0
th, gh = sample_estimators(params, T, McConfig(n_paths=5000, dt=1e-2, seed=3))
emp = np.cov(np.vstack([math.sqrt(T) * (th - params.theta), math.sqrt(T) * (gh - params.gamma)]))
print("empirical covariance of sqrt(T)(estimate - truth):\n", np.round(emp, 3))
print("limit:\n", clt_covariance(params))

for T in (10.0, 50.0, 250.0):
    cfg = McConfig(n_paths=2000, dt=2e-2, seed=4)
    th_hat, _ = sample_estimators(params, T, cfg)
    th_tilde, _ = sample_estimators(params, T, McConfig(n_paths=2000, dt=2e-2, seed=4, estimator="tilde"))
    print(f"T={T:5g}  mean |theta_hat - theta_tilde| = {np.mean(np.abs(th_hat - th_tilde)):.2e}")
