"""
The boundary shell and its independence classes
===============================================

Only the unit cubes that straddle the surface sum x_r ** alpha = n carry
randomness.  Their prefixes are split into classes whose fibers are disjoint,
so each class sum is a sum of independent bounded variables.
"""

import math

from sumset_fuchs import (
    Parameters, build_partition, enumerate_shell, hoeffding_empirical, hoeffding_y,
    verify_partition,
)

p = Parameters(3, 2)   # alpha = 3/2
for n in (10**3, 10**4, 10**5):
    shell = enumerate_shell(p, n)
    part = build_partition(p, n, shell)
    rep = verify_partition(part)
    print(f"n={n:>6}: {len(shell):>6} prefixes, {shell.tuple_count:>7} shell tuples, "
          f"{rep.s:>6} classes, largest {rep.max_class}, D={math.sqrt(rep.D2):.1f}, "
          f"violations {rep.violations}")

###############################################################################
# Simulate one class: draw fresh thetas and compare the spread of the class
# sum with the two-sided Hoeffding tail.
n = 10**4
part = build_partition(p, n, enumerate_shell(p, n))
biggest = max(range(len(part)), key=lambda c: part.sizes[c])
report = hoeffding_empirical(part[biggest], p, n, trials=2000, seed=1)
for row in report.rows:
    print(f"y={row.y:.1f}: frequency {row.frequency:.4f} <= bound {row.bound:.4f}: {row.ok}")

###############################################################################
# The deviation scale used for the whole shell.
print("y at n=10^4:", round(hoeffding_y(p, n), 3))
