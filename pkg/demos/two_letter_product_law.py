"""
Two letters: invariant product laws that are not zigzag Markov
==============================================================

With two symbols there is a family of TMs whose invariant law on the line
is i.i.d. while no zigzag Markov law is invariant.
"""

import numpy as np

from pca_markov import classify_kappa1, gen_kappa1_case2, rank_one
from pca_markov.line import build_q_family, check_line_invariance, kappa1_rho0, numerical_rank
from pca_markov.oracle import exact_hz_distribution, is_hzcmc

tm, rho = gen_kappa1_case2(seed=4, branch=1)
print(np.round(tm.t[..., 1], 4))

c = classify_kappa1(tm)
print("quartic identity:", c.cond_i, " product branches:", c.cond_ii_a, c.cond_ii_b)

r0 = kappa1_rho0(tm)
print("rho0 =", r0, "(generator used", rho[0], ")")

# invariance is checked on every word up to a length bound
rho = np.array([r0, 1 - r0])
chk = check_line_invariance(tm, rank_one(rho), rho)
print("line invariance:", chk.ok, "worst residual", chk.worst_residual)

print("zigzag fit on a ring of 3:", is_hzcmc(exact_hz_distribution(tm, 3)).ok)

###############################################################################
# The other branch keeps the product law invariant but the Q matrices are
# no longer rank one.

tm2, rho2 = gen_kappa1_case2(seed=4, branch=2)
fam = build_q_family(tm2, rank_one(rho2), rho2)
print("ranks:", [numerical_rank(q) for q in fam.q])
