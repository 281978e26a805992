"""
Cyclic zigzags against the exact invariant law
==============================================

On a ring of n cells the invariant law is computed exactly by solving the
stationary equation of the full configuration chain. The algebraic
criteria are then compared with what the oracle sees.
"""

import numpy as np

from pca_markov import analyze_hz_cyclic, gen_commuting_pair, gen_cond3_tm, kernel_pair_to_tm
from pca_markov.oracle import exact_hz_distribution, hzcmc_weights, is_hzcmc

d, u = gen_commuting_pair(kappa=1, seed=0)
tm = kernel_pair_to_tm(d, u)

for n in (3, 4, 5):
    hz = exact_hz_distribution(tm, n)
    gap = np.max(np.abs(hz.joint - hzcmc_weights(d, u, n)))
    print(f"n={n}: states {hz.joint.size}, max gap to the product formula {gap:.1e}")

fit = is_hzcmc(exact_hz_distribution(tm, 4))
print("fit recovered:", fit.ok, "residual", fit.residual)

###############################################################################
# Non-commuting kernels from the gibbs family: the ring criterion looks at
# diagonals of powers of D U and U D. When it fails, the oracle agrees that
# the law is not a cyclic zigzag Markov chain.

for seed in range(6):
    tm = gen_cond3_tm(2, seed)
    cyc = analyze_hz_cyclic(tm, 3)
    fit = is_hzcmc(exact_hz_distribution(tm, 3))
    print(seed, cyc.verdict.value, cyc.failed, "oracle fit:", fit.ok)
