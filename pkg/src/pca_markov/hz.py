"""Markov laws on the horizontal zigzag (two consecutive rows, interleaved).

The zigzag law of a pair of kernels ``(D, U)`` weighs
``a_0 b_0 a_1 b_1 ...`` (top row ``a``, next row ``b``) by
``rho[a_0] * D[a_0,b_0] U[b_0,a_1] D[a_1,b_1] ...``. The functions here
decide whether a transition matrix leaves such a law invariant and
construct the only possible kernels when it does.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .core import (
    EtaNotFullSupport,
    TransitionMatrix,
    ZeroDenominator,
    ZeroPairProbability,
    check_cond_tauxg,
    check_kernel,
    validate_tm,
)
from .spectral import EPS_EIG, perron

__all__ = [
    "EPS_COND",
    "Verdict",
    "ConditionResult",
    "HZSolution",
    "HZAnalysis",
    "rel_residual",
    "check_cond_gibbs1",
    "check_cond_gibbs_g",
    "y_matrix",
    "build_nu",
    "build_x",
    "build_kernels_eta",
    "commutator_norm",
    "analyze_hz",
    "kernel_pair_to_tm",
    "check_cond_dut",
    "verify_theorem1",
    "time_reversal_tm",
]

EPS_COND = 1e-9
_FLOOR = 1e-300


class Verdict(str, Enum):
    MARKOV_PROVEN = "MARKOV_PROVEN"
    NOT_MARKOV_PROVEN = "NOT_MARKOV_PROVEN"
    INCONCLUSIVE = "INCONCLUSIVE"


@dataclass(frozen=True)
class ConditionResult:
    ok: bool
    residual: float
    witness: tuple | None = None

    def __bool__(self):
        return self.ok

    def __iter__(self):
        yield self.ok
        yield self.residual
        yield self.witness


@dataclass(frozen=True)
class HZSolution:
    """Candidate zigzag kernels built from ``gamma`` and their diagnostics.

    ``rho`` is ``gamma * mu`` normalised; it is stationary for ``d @ u``
    whenever the kernels commute.
    """

    d: np.ndarray
    u: np.ndarray
    rho: np.ndarray
    gamma: np.ndarray
    mu: np.ndarray
    nu: np.ndarray
    lam: float
    x: np.ndarray
    commutator_norm: float
    diag_residual: float
    unreachable: tuple = ()

    @property
    def m(self) -> np.ndarray:
        """Kernel of a single row, ``D U``."""
        return self.d @ self.u


@dataclass(frozen=True)
class HZAnalysis:
    """Outcome of :func:`analyze_hz` (and of its cyclic counterpart).

    ``solution`` holds the candidate kernels whenever they could be built,
    also when the verdict is negative.
    """

    verdict: Verdict
    solution: HZSolution | None = None
    failed: str | None = None
    residual: float | None = None
    reason: str = ""
    details: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.verdict is Verdict.MARKOV_PROVEN


def rel_residual(lhs, rhs, floor: float = _FLOOR):
    """``|lhs - rhs| / max(lhs, rhs)``, absolute when both sides are below ``floor``."""
    lhs = np.asarray(lhs, dtype=float)
    rhs = np.asarray(rhs, dtype=float)
    diff = np.abs(lhs - rhs)
    scale = np.maximum(np.abs(lhs), np.abs(rhs))
    tiny = scale < floor
    return np.where(tiny, diff, diff / np.where(tiny, 1.0, scale))


def _first_argmax(r: np.ndarray) -> tuple:
    # np.argmax returns the first maximiser in C order, i.e. lexicographic
    return tuple(int(i) for i in np.unravel_index(int(np.argmax(r)), r.shape))


def _require_tauxg(t: np.ndarray):
    z = np.argwhere(t[:, :, 0] <= 0)
    if z.size:
        a, b = z[0]
        raise ZeroDenominator((a, b, 0), "T(a,b,0)")
    z = np.argwhere(t[0, 0, :] <= 0)
    if z.size:
        raise ZeroDenominator((0, 0, z[0][0]), "T(0,0,c)")


def gibbs1_rhs(t: np.ndarray) -> np.ndarray:
    """``T000 T(a,b,0) T(a,0,c) T(0,b,c) / (T(a,0,0) T(0,b,0) T(0,0,c))``."""
    num = (
        t[0, 0, 0]
        * t[:, :, 0][:, :, None]
        * t[:, 0, :][:, None, :]
        * t[0, :, :][None, :, :]
    )
    den = t[:, 0, 0][:, None, None] * t[0, :, 0][None, :, None] * t[0, 0, :][None, None, :]
    return num / den


def check_cond_gibbs1(tm: TransitionMatrix, eps_cond: float = EPS_COND) -> ConditionResult:
    """Every entry is determined by the three slices through index 0.

    Requires ``T(a,b,0) > 0`` and ``T(0,0,c) > 0``; the residual is the
    absolute entrywise gap.
    """
    t = tm.t
    _require_tauxg(t)
    r = np.abs(t - gibbs1_rhs(t))
    worst = float(r.max())
    ok = worst <= eps_cond
    return ConditionResult(ok, worst, None if ok else _first_argmax(r))


def check_cond_gibbs_g(tm: TransitionMatrix, eps_cond: float = EPS_COND) -> ConditionResult:
    """Symmetric six-index product identity.

    ``T(a',b',c') T(a,b',c) T(a,b,c') T(a',b,c)
    == T(a,b,c) T(a,b',c') T(a',b',c) T(a',b,c')`` for all indices, scanned
    in blocks of fixed ``a`` so memory stays at ``K**5``.
    """
    t = tm.t
    worst = -1.0
    witness = None
    for a in range(t.shape[0]):
        # axes: a', b, b', c, c'
        lhs = (
            t[:, None, :, None, :]  # T(a',b',c')
            * t[a][None, None, :, :, None]  # T(a,b',c)
            * t[a][None, :, None, None, :]  # T(a,b,c')
            * t[:, :, None, :, None]  # T(a',b,c)
        )
        rhs = (
            t[a][None, :, None, :, None]  # T(a,b,c)
            * t[a][None, None, :, None, :]  # T(a,b',c')
            * t[:, None, :, :, None]  # T(a',b',c)
            * t[:, :, None, None, :]  # T(a',b,c')
        )
        r = rel_residual(lhs, rhs)
        m = float(r.max())
        if m > worst:
            worst = m
            ap, b, bp, c, cp = _first_argmax(r)
            witness = (a, ap, b, bp, c, cp)
    ok = worst <= eps_cond
    return ConditionResult(ok, worst, None if ok else witness)


def y_matrix(tm: TransitionMatrix) -> np.ndarray:
    """``Y[i, j] = T(i, i, j)``: the dynamics seen on constant configurations."""
    k = tm.size
    return tm.t[np.arange(k), np.arange(k), :].copy()


def build_nu(tm: TransitionMatrix, eps_eig: float = EPS_EIG) -> np.ndarray:
    return perron(y_matrix(tm), eps_eig).left


def build_x(tm: TransitionMatrix, nu) -> np.ndarray:
    """``X[d, a] = T(a,a,0) nu_a / T(a,d,0)``."""
    t = tm.t
    t0 = t[:, :, 0]  # t0[a, d] = T(a,d,0)
    if np.any(t0 <= 0):
        a, d = np.argwhere(t0 <= 0)[0]
        raise ZeroDenominator((a, d, 0), "T(a,d,0)")
    nu = np.asarray(nu, dtype=float)
    diag = np.diagonal(t0) * nu  # T(a,a,0) nu_a
    return (diag[:, None] / t0).T


def _kernels_eta(t: np.ndarray, eta: np.ndarray):
    t0 = t[:, :, 0]
    w = eta[None, :] / t0  # w[a, l] = eta_l / T(a,l,0)
    d = np.einsum("al,alc->ac", w, t) / w.sum(axis=1)[:, None]
    # u_num[c, b] = eta_b / T(0,b,0) * T(0,b,c)
    u_num = (w[0][:, None] * t[0]).T
    # zigzag extension rule: no parent pair (a, b) can produce c
    dead = ~np.any(t > 0, axis=0).T  # dead[c, b]
    u_num = np.where(dead, 0.0, u_num)
    den = u_num.sum(axis=1)
    unreachable = tuple(int(c) for c in np.flatnonzero(den <= 0))
    safe = np.where(den > 0, den, 1.0)
    u = u_num / safe[:, None]
    return d, u, unreachable, dead


def build_kernels_eta(tm: TransitionMatrix, eta) -> tuple[np.ndarray, np.ndarray]:
    """The kernels ``(D^eta, U^eta)`` parametrised by a full-support law ``eta``."""
    eta = np.asarray(eta, dtype=float)
    if eta.shape != (tm.size,) or np.any(eta <= 0):
        raise EtaNotFullSupport("eta must be a positive vector of length kappa+1")
    _require_tauxg(tm.t)
    d, u, _, _ = _kernels_eta(tm.t, eta / eta.sum())
    return d, u


def commutator_norm(d, u) -> float:
    """Largest entry of ``|D U - U D|``."""
    return float(np.max(np.abs(d @ u - u @ d)))


def _diag_residual(d, u) -> float:
    return float(np.max(np.abs(np.diagonal(d @ u) - np.diagonal(u @ d))))


def candidate_solution(tm: TransitionMatrix, eps_eig: float = EPS_EIG) -> HZSolution:
    """Run the pipeline ``nu -> X -> (lam, gamma, mu) -> (D, U)``; no verdict."""
    t = tm.t
    nu = build_nu(tm, eps_eig)
    x = build_x(tm, nu)
    sd = perron(x, eps_eig)
    gamma = sd.left
    d, u, unreachable, _ = _kernels_eta(t, gamma)
    rho = gamma * sd.right
    rho = rho / rho.sum()
    return HZSolution(
        d=d,
        u=u,
        rho=rho,
        gamma=gamma,
        mu=sd.right,
        nu=nu,
        lam=sd.lam,
        x=x,
        commutator_norm=commutator_norm(d, u),
        diag_residual=_diag_residual(d, u),
        unreachable=unreachable,
    )


def analyze_hz(
    tm: TransitionMatrix, eps_cond: float = EPS_COND, eps_eig: float = EPS_EIG
) -> HZAnalysis:
    """Decide whether some zigzag Markov law is invariant on the infinite line.

    Needs ``T(a,b,0) > 0`` and ``T(0,0,c) > 0`` (positive rate is not
    required); otherwise the verdict is ``INCONCLUSIVE``. The criterion is
    the gibbs1 identity plus commutation of the candidate kernels.
    """
    if not check_cond_tauxg(tm):
        return HZAnalysis(
            Verdict.INCONCLUSIVE,
            reason="T(a,b,0) > 0 and T(0,0,c) > 0 do not both hold; "
            "zero-rate traps are not classified",
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
    if tm.kappa == 1 and sol.commutator_norm > eps_cond:
        warnings.warn(
            f"kappa=1 and gibbs1 holds, yet commutator is {sol.commutator_norm:.3e}",
            RuntimeWarning,
            stacklevel=2,
        )
    if sol.commutator_norm > eps_cond:
        return HZAnalysis(
            Verdict.NOT_MARKOV_PROVEN,
            solution=sol,
            failed="cond_commut",
            residual=sol.commutator_norm,
            reason="candidate kernels D^gamma and U^gamma do not commute",
        )
    return HZAnalysis(Verdict.MARKOV_PROVEN, solution=sol, residual=sol.commutator_norm)


# ------------------------------------------------------ explicit (D, U) pairs


def _pair_product(d, u):
    d = check_kernel(d)
    u = check_kernel(u, size=d.shape[0])
    du = d @ u
    z = np.argwhere(du <= 0)
    if z.size:
        raise ZeroPairProbability(*z[0])
    return d, u, du


def kernel_pair_to_tm(d, u) -> TransitionMatrix:
    """``T(a,b,c) = D[a,c] U[c,b] / (D U)[a,b]``."""
    d, u, du = _pair_product(d, u)
    t = d[:, None, :] * u.T[None, :, :] / du[:, :, None]
    return validate_tm(t)


def check_cond_dut(tm: TransitionMatrix, d, u, eps_cond: float = EPS_COND) -> ConditionResult:
    """``T`` equals ``D U`` split by the intermediate letter, zeros included.

    Where ``T(a,b,c) > 0`` the residual is ``|T - D[a,c]U[c,b]/(DU)[a,b]|``;
    where ``T(a,b,c) == 0`` it is ``D[a,c] U[c,b]``.
    """
    d, u, du = _pair_product(d, u)
    t = tm.t
    split = d[:, None, :] * u.T[None, :, :]
    pred = split / du[:, :, None]
    r = np.where(t > 0, np.abs(t - pred), split)
    worst = float(r.max())
    ok = worst <= eps_cond
    return ConditionResult(ok, worst, None if ok else _first_argmax(r))


def verify_theorem1(tm: TransitionMatrix, d, u, eps_cond: float = EPS_COND) -> bool:
    """The ``(D, U)`` zigzag law is invariant: split identity and ``DU == UD``."""
    c1 = check_cond_dut(tm, d, u, eps_cond)
    return c1.ok and commutator_norm(d, u) <= eps_cond


def time_reversal_tm(d, u) -> TransitionMatrix:
    """``T'(a,b,c) = U[a,c] D[c,b] / (U D)[a,b]``, the time-reversed dynamics."""
    return kernel_pair_to_tm(u, d)
