"""How much does a second sensor tell us about theta?

A primary measurement x = F theta + u is fixed. A secondary measurement
y = G phi + v observes a correlated signal phi through a designable matrix G.
This script evaluates the information gain of a few candidate matrices on the
scalar toy system and on Example 1, and checks the analytic gradient against
finite differences.
"""

import numpy as np

from fusegain import derive, gen_example1, gen_scalar_system
from fusegain.gain import fd_gradient, gradient, information_gain, information_gain_snr_form, upper_bound

sys = gen_scalar_system()
d = derive(sys)
print("scalar system, all variances one")
for g in (0.0, 0.5, 1.0):
    G = np.array([[g]])
    closed = 0.5 * np.log1p(g**2 / (g**2 + 1))
    print(f"  g = {g:3.1f}  gain = {information_gain(G, d):.7f} nats  closed form {closed:.7f}")
print(f"  upper bound = {upper_bound(d):.7f} = 0.5 ln 2")

sys = gen_example1(1)
d = derive(sys)
G = np.eye(5) / np.sqrt(5)
print("\nExample 1, scenario 1, isotropic G = I/sqrt(5)")
print(f"  log-det form  {information_gain(G, d):.10f}")
print(f"  SNR form      {information_gain_snr_form(G, d):.10f}")
print(f"  2.5 ln(41/36) {2.5 * np.log(41 / 36):.10f}")
print(f"  bound         {upper_bound(d):.10f}")

rng = np.random.default_rng(0)
G = rng.standard_normal((5, 5)) / 5
err = np.linalg.norm(gradient(G, d) - fd_gradient(G, d)) / np.linalg.norm(gradient(G, d))
print(f"\ngradient vs central differences at a random G: relative error {err:.1e}")
