"""Sharp tail approximations against exact and simulated probabilities.

For theta = -2 the event {theta_hat_T >= c} falls into a different regime
depending on where c sits. This script prints the first-order approximation
next to an independent reference: exact quadrature at c = 0, importance
sampling for c < theta/3, and the solved tilt for the boundary regimes.
"""
from oushift import McConfig, ModelParams, estimate_tail_is, solve_tilt, tail_approx, tail_exact_c0

params = ModelParams(theta=-2.0, gamma=0.0)

print("c = 0: approximation / exact quadrature")
for T in (8.0, 12.0, 30.0, 120.0):
    approx = tail_approx(params, 0.0, T).approx_prob
    exact = tail_exact_c0(params, T)
    print(f"  T={T:5g}  approx={approx:.4e}  exact={exact:.4e}  ratio={approx / exact:.3f}")

print("\nc = -1 (below theta/3): approximation / importance sampling")
for T in (10.0, 20.0):
    approx = tail_approx(params, -1.0, T).approx_prob
    est = estimate_tail_is(params, -1.0, T, McConfig(n_paths=50_000, seed=1))
    print(f"  T={T:5g}  approx={approx:.4e}  IS={est.p_hat:.4e} +- {est.stderr:.1e}  ratio={approx / est.p_hat:.3f}")

print("\nc = 1 and the junction c = theta/3: solved tilt next to its limit")
for T in (50.0, 200.0, 800.0):
    a_T = solve_tilt(params, 1.0, T)
    a_j = solve_tilt(params, params.theta / 3, T)
    print(f"  T={T:5g}  T(a_T - 6)={T * (a_T - 6):+.4f} (-> -0.8)   T(a_T - 8/3)^2={T * (a_j - 8 / 3) ** 2:.4f} (-> 0.6667)")
