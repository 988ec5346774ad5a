"""
How fast does the error grow?
=============================

For k = 2, beta = 1 the predicted size of S(n) - pi n / 4 is about
n ** (1/4) log n.  Fit the log-log slope of the median error over seeds.
"""

from sumset_fuchs import (
    Parameters, derive_seed, empirical_deviation, fit_scaling, predicted_error_exponent,
)

p = Parameters(2, 1)
grid = [2**j for j in range(6, 17)]
seeds = [derive_seed(0, "demo-discrepancy", i) for i in range(10)]

samples, summary = empirical_deviation(p, grid, seeds)
for row in summary:
    print(f"n={row['n']:>6}  median |S - Cn| = {row['median_abs_dev_S']:8.2f}")

###############################################################################
# The fitted slope should sit near the predicted exponent plus a little for
# the log factor.
fit = fit_scaling([(r["n"], r["median_abs_dev_S"]) for r in summary])
pred = predicted_error_exponent(p)
print(f"fitted slope {fit.slope:.3f} +- {fit.stderr:.3f}, predicted {float(pred.exponent)} "
      f"times a {pred.log_factor.value} factor")

###############################################################################
# Other regimes: the predicted exponent changes with alpha = k / beta.
for k, beta in [(3, 1), (3, "3/2"), (3, 2)]:
    q = Parameters(k, beta)
    print(q, q.regime.value, predicted_error_exponent(q).exponent)
