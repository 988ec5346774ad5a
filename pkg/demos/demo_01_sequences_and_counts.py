"""
Random sequences and their representation counts
================================================

Draw one random sequence a_i = floor(theta_i ** alpha), count ordered pairs
that hit each value, and watch the summatory count follow the quarter-disk
area pi n / 4.
"""

import math

import numpy as np

from sumset_fuchs import Parameters, derive_seed, rep_series, sandwich_check, sequence_for

###############################################################################
# k = 2 and beta = 1 give alpha = 2: the values look like randomly jittered squares.
p = Parameters(2, 1)
seed = derive_seed(2024, "demo", 0)
seq = sequence_for(p, 10**5, seed)
print(p, "first values:", seq.a[:12])

###############################################################################
# Exact counts r(m) of ordered pairs summing to m, and their prefix sums S(n).
rep = rep_series(seq.slim(), 10**5)
for n in (10**2, 10**3, 10**4, 10**5):
    print(f"n={n:>6}  S(n)={int(rep.S[n]):>7}  pi n/4={math.pi * n / 4:10.1f}  "
          f"diff={int(rep.S[n]) - math.pi * n / 4:8.1f}")

###############################################################################
# S(n) is squeezed between two lattice counts sigma_n and sigma_{n+k}, which
# only use the real values theta_i ** alpha.
for n in (50, 500, 5000):
    r = sandwich_check(seq, n, rep)
    print(f"sigma_{n} = {r.sigma_n} <= S = {r.S_n} <= sigma_{n + 2} = {r.sigma_n_plus_k}: {r.ok}")

###############################################################################
# The largest representation count stays small compared with n.
print("max r(m) for m <= 10^5:", int(np.max(rep.r)))
