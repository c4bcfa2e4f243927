"""Rate functions of the drift and shift estimators.

Prints the three rate functions on a grid as CSV, ready for plotting. The
drift rate has two branches that meet smoothly at c = theta/3; the shift rate
is the infimum of the joint rate over the drift and is zero only at the truth.
"""
import numpy as np

from oushift import ModelParams, rate_gamma, rate_joint, rate_theta

params = ModelParams(theta=-2.0, gamma=2.0)

print("# drift rate I_theta(c)")
print("c,I_theta")
for c in np.arange(-6.0, 4.01, 0.5):
    print(f"{c:g},{rate_theta(params.theta, c):.6f}")

print("\n# shift rate I_gamma(d), minimum 0 at d = gamma")
print("d,I_gamma")
for d in np.arange(-1.0, 5.01, 0.5):
    print(f"{d:g},{rate_gamma(params, d):.6f}")

# the joint rate at the origin is finite although Xbar_T must vanish there
print("\njoint rate at (0, 0):", rate_joint(params, 0.0, 0.0))
