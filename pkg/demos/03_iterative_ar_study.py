"""Extrinsic vs intrinsic gradient search on the AR mixing systems.

Both algorithms start from the same random unit-norm matrix and use the
constant step 0.1. Since the conditional covariance is the identity, the
closed-form waterfilling design gives the exact optimum for comparison.
"""

from fusegain import derive, gen_ar_system
from fusegain.optimize import OptimConfig, run
from fusegain.waterfill import analytic_design

for rho in (0.1, 0.5, 0.9):
    sys = gen_ar_system(rho)
    d = derive(sys)
    opt = analytic_design(sys, d).gain
    print(f"rho = {rho}: closed-form optimum {opt:.9f}")
    for alg in ("extrinsic", "intrinsic"):
        _, tr = run(sys, d, alg, OptimConfig(step=0.1))
        hit = next((r.iter for r in tr.records if opt - r.gain < 1e-6), None)
        print(f"  {alg:9s} final {tr.final_gain:.9f}  {tr.status:9s} iters {len(tr.records) - 1:4d}"
              f"  within 1e-6 after {hit}")
    _, tr = run(sys, d, "intrinsic", OptimConfig(step_mode="line_search"))
    print(f"  line search final {tr.final_gain:.9f} after {len(tr.records) - 1} iterations")
