"""
Simulating the automaton and checking pattern frequencies
=========================================================

Rows are updated in parallel from a counter-based generator, so the
diagram depends only on the seed and not on the number of threads.
"""

import hashlib

import numpy as np

from pca_markov import analyze_hz, gen_commuting_pair, kernel_pair_to_tm
from pca_markov.simulate import pattern_stats, simulate

d, u = gen_commuting_pair(kappa=2, seed=2)
tm = kernel_pair_to_tm(d, u)
sol = analyze_hz(tm).solution

dg = simulate(tm, width=512, steps=2000, seed=7, threads=4)
print("sha256:", hashlib.sha256(dg.to_bytes()).hexdigest()[:16])
print("same with one thread:", simulate(tm, 512, 2000, 7, threads=1).to_bytes() == dg.to_bytes())

st = pattern_stats(dg, 2, burn_in=1000)
expected = (sol.rho[:, None] * sol.m).ravel()
for i, z in enumerate(st.z_scores(expected)):
    print(st.pattern(i), f"{st.freq[i]:.4f} vs {expected[i]:.4f}  z={z:.2f}")
print("within 4 SE:", st.agrees(expected, z=4.0))

print(dg.to_text().splitlines()[-1][:60])
