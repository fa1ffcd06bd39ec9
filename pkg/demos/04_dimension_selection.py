"""Choosing the output dimension of the secondary sensor.

For each k the best k x q channel is designed and the smallest k whose gain
is within c = 1e-3 of the full-dimension gain is selected. Under white
secondary noise this dimension matches the rank of the optimal full design.
"""

from fusegain import gen_example1, gen_random_system
from fusegain.dimension import dimension_sweep

for label, sys in (("Example 1, scenario 3", gen_example1(3)),
                   ("random 20x20, identity conditional, seed 0", gen_random_system(0))):
    sweep = dimension_sweep(sys, "analytic", c=1e-3, workers=4)
    print(label)
    print("   k   gain (nats)  rank")
    for r in sweep.records:
        print(f"  {r.k:2d}  {r.gain:11.6f}  {r.rank:4d}")
    print(f"  selected dimension {sweep.t_hat}, largest rank {sweep.max_rank}\n")
