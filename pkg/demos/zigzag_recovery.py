"""
Recovering a zigzag Markov law from its transition matrix
==========================================================

Build a TM from a commuting pair of kernels, forget the kernels, and ask
the analysis to find them again.
"""

import numpy as np

from pca_markov import analyze_hz, gen_commuting_pair, kernel_pair_to_tm

d, u = gen_commuting_pair(kappa=2, seed=3)
print("D U - U D =", np.max(np.abs(d @ u - u @ d)))

tm = kernel_pair_to_tm(d, u)
res = analyze_hz(tm)
print("verdict:", res.verdict.value)

sol = res.solution
print("lambda  :", sol.lam)
print("rho     :", sol.rho)
print("max |D - D_true| =", np.max(np.abs(sol.d - d)))
print("max |U - U_true| =", np.max(np.abs(sol.u - u)))

# rho is stationary for the row kernel M = D U
print("rho M - rho =", np.max(np.abs(sol.rho @ sol.m - sol.rho)))

###############################################################################
# A TM from the gibbs-type family passes the first test but its kernels do
# not commute, so the verdict is negative and names the failing condition.

from pca_markov import gen_cond3_tm

bad = analyze_hz(gen_cond3_tm(2, seed=0))
print(bad.verdict.value, bad.failed, bad.residual)
