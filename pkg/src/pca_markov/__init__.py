"""Markov invariant laws of two-neighbour probabilistic cellular automata.

Checks whether a Markov chain law (on a row, or on the zigzag between two
consecutive rows) is invariant, on the line and on cycles, with exact
small-cylinder oracles and a seeded simulator to cross-check.
"""

from .core import *  # noqa: F401,F403
from .core import __all__ as _core_all
from .cyclic import analyze_hz_cyclic, check_diag_powers, verify_theorem4
from .generators import gen_commuting_pair, gen_cond3_tm, gen_kappa1_case2, gen_symmetric_tm
from .hz import (
    EPS_COND,
    HZAnalysis,
    HZSolution,
    Verdict,
    analyze_hz,
    check_cond_dut,
    check_cond_gibbs1,
    check_cond_gibbs_g,
    kernel_pair_to_tm,
    time_reversal_tm,
    verify_theorem1,
)
from .line import (
    build_q_family,
    check_cyclic_line_invariance,
    check_iid_sufficient,
    check_line_invariance,
    classify_kappa1,
    markov2_lift,
    spectral_necessity_report,
)
from .oracle import (
    EPS_ORACLE,
    exact_hz_distribution,
    exact_stationary,
    is_cmc,
    is_hzcmc,
    pca_cylinder_operator,
)
from .report import build_report
from .simulate import pattern_stats, simulate
from .spectral import EPS_EIG, perron, stationary_det

__version__ = "0.1.0"

__all__ = list(_core_all) + [
    "EPS_COND",
    "EPS_EIG",
    "EPS_ORACLE",
    "HZAnalysis",
    "HZSolution",
    "Verdict",
    "analyze_hz",
    "analyze_hz_cyclic",
    "build_q_family",
    "build_report",
    "check_cond_dut",
    "check_cond_gibbs1",
    "check_cond_gibbs_g",
    "check_cyclic_line_invariance",
    "check_diag_powers",
    "check_iid_sufficient",
    "check_line_invariance",
    "classify_kappa1",
    "exact_hz_distribution",
    "exact_stationary",
    "gen_commuting_pair",
    "gen_cond3_tm",
    "gen_kappa1_case2",
    "gen_symmetric_tm",
    "is_cmc",
    "is_hzcmc",
    "kernel_pair_to_tm",
    "markov2_lift",
    "pattern_stats",
    "pca_cylinder_operator",
    "perron",
    "simulate",
    "spectral_necessity_report",
    "stationary_det",
    "time_reversal_tm",
    "verify_theorem1",
    "verify_theorem4",
]
