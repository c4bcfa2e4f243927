"""Chaos decomposition of the quadratic functional Z_T(a, b).

The eigenvalues of the discretized quadratic form give the cumulant
generating function as a convergent series, which is compared with the
exact Gaussian calculation. The normalized sum of squared eigenvalues
approaches its spectral-density limit with a visible 1/T correction.
"""
from oushift import ModelParams, SimGrid, cgf_exact, decompose, series_cgf, spectral_limit, spectral_moment

params = ModelParams(theta=-1.0, gamma=0.5)
a, b, T = 0.2, 0.1, 20.0
exact = cgf_exact(params, a, b, T).value_exact
for n in (500, 1000, 2000):
    d = decompose(params, a, b, SimGrid(T, n))
    print(f"n_steps={n:5d}  series={series_cgf(d, 1.0):.10f}  exact={exact:.10f}  radius={d.radius:.3f}")

print("\n(1/T) sum alpha^2 against b^2/(4|theta|^3)")
flat = ModelParams(theta=-1.0, gamma=0.0)
for T in (10.0, 20.0, 40.0):
    d = decompose(flat, 0.0, 1.0, SimGrid(T, int(50 * T)))
    ratio = spectral_moment(d, 2) / spectral_limit(-1.0, 1.0, 2)
    print(f"T={T:5g}  ratio={ratio:.4f}  (1 - ratio) T = {(1 - ratio) * T:.3f}")
