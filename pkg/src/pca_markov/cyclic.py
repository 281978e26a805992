"""Zigzag Markov laws on the cylinder of circumference ``n``.

On a cycle, commutation of the zigzag kernels weakens to equality of the
diagonals of ``(DU)^k`` and ``(UD)^k`` for ``k`` up to ``kappa + 1``.
"""

from __future__ import annotations

import numpy as np

from .core import TransitionMatrix, check_cond_tauxg
from .hz import (
    EPS_COND,
    HZAnalysis,
    ConditionResult,
    Verdict,
    candidate_solution,
    check_cond_dut,
    check_cond_gibbs1,
)
from .spectral import EPS_EIG

__all__ = ["check_diag_powers", "analyze_hz_cyclic", "verify_theorem4", "cyclic_kmax"]


def cyclic_kmax(kappa: int, n: int | None = None) -> int:
    return kappa + 1 if n is None else min(kappa + 1, int(n))


def check_diag_powers(d, u, kmax: int, eps_cond: float = EPS_COND) -> ConditionResult:
    """``diag((DU)^k) == diag((UD)^k)`` for ``1 <= k <= kmax``.

    ``residual`` is the worst absolute gap over all tested powers and the
    witness on failure is the power ``k`` attaining it.
    """
    d = np.asarray(d, dtype=float)
    u = np.asarray(u, dtype=float)
    du, ud = d @ u, u @ d
    p, q = du.copy(), ud.copy()
    worst, worst_k = 0.0, 1
    for k in range(1, kmax + 1):
        if k > 1:
            p = p @ du
            q = q @ ud
        gap = float(np.max(np.abs(np.diagonal(p) - np.diagonal(q))))
        if gap > worst:
            worst, worst_k = gap, k
    ok = worst <= eps_cond
    return ConditionResult(ok, worst, None if ok else (worst_k,))


def analyze_hz_cyclic(
    tm: TransitionMatrix,
    n: int | None = None,
    eps_cond: float = EPS_COND,
    eps_eig: float = EPS_EIG,
) -> HZAnalysis:
    """Zigzag Markov invariance on the cylinder.

    With ``n=None`` the answer holds for every circumference (powers up to
    ``kappa + 1``); with a finite ``n`` only powers up to ``min(kappa+1, n)``
    are required.
    """
    if not check_cond_tauxg(tm):
        return HZAnalysis(
            Verdict.INCONCLUSIVE,
            reason="T(a,b,0) > 0 and T(0,0,c) > 0 do not both hold",
        )
    c3 = check_cond_gibbs1(tm, eps_cond)
    if not c3.ok:
        return HZAnalysis(
            Verdict.NOT_MARKOV_PROVEN,
            failed="cond_gibbs1",
            residual=c3.residual,
            reason=f"gibbs1 identity fails at {c3.witness}",
            details={"witness": c3.witness},
        )
    sol = candidate_solution(tm, eps_eig)
    kmax = cyclic_kmax(tm.kappa, n)
    c8 = check_diag_powers(sol.d, sol.u, kmax, eps_cond)
    details = {"kmax": kmax, "diag_power_residual": c8.residual}
    if not c8.ok:
        return HZAnalysis(
            Verdict.NOT_MARKOV_PROVEN,
            solution=sol,
            failed="cond_cyclic_diag",
            residual=c8.residual,
            reason=f"diagonals of (DU)^k and (UD)^k differ, most at k={c8.witness[0]}",
            details=details,
        )
    return HZAnalysis(Verdict.MARKOV_PROVEN, solution=sol, residual=c8.residual, details=details)


def verify_theorem4(tm: TransitionMatrix, d, u, n: int, eps_cond: float = EPS_COND) -> bool:
    """The ``(D, U)`` cyclic zigzag law on circumference ``n`` is invariant."""
    if not check_cond_dut(tm, d, u, eps_cond).ok:
        return False
    return check_diag_powers(d, u, cyclic_kmax(tm.kappa, n), eps_cond).ok
