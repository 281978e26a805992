"""Markov laws on a single row: the line and the cycle.

Everything here goes through the per-letter matrices

    Q[x][i, j] = sqrt(rho_i) / sqrt(rho_j) * M[i, j] * T(i, j, x)

whose word products give the probability that a row drawn from the
``(rho, M)`` chain is mapped by the automaton onto a given word.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .core import (
    BudgetExceeded,
    KappaMismatch,
    NotPositiveRate,
    RhoNotFullSupport,
    RhoNotStationary,
    TransitionMatrix,
    is_positive_rate,
)
from .hz import EPS_COND, rel_residual
from .spectral import is_primitive, perron

__all__ = [
    "EPS_RANK",
    "WORD_BUDGET",
    "QFamily",
    "LineCheck",
    "NecessityEntry",
    "NecessityReport",
    "Kappa1Classification",
    "Markov2Lift",
    "build_q_family",
    "check_line_invariance",
    "check_cyclic_line_invariance",
    "spectral_necessity_report",
    "check_iid_sufficient",
    "classify_kappa1",
    "kappa1_rho0",
    "markov2_lift",
    "numerical_rank",
]

EPS_RANK = 1e-8
WORD_BUDGET = 2_000_000
_EPS_STAT = 1e-10


@dataclass(frozen=True)
class QFamily:
    kappa: int
    rho: np.ndarray
    m: np.ndarray
    q: np.ndarray  # q[x] is the matrix for letter x
    rho_half: np.ndarray

    def product(self, word) -> np.ndarray:
        out = np.eye(self.kappa + 1)
        for x in word:
            out = out @ self.q[x]
        return out

    def weight(self, word) -> float:
        """``rho^(1/2) Q_word rho^(1/2)^t``."""
        return float(self.rho_half @ self.product(word) @ self.rho_half)


@dataclass(frozen=True)
class LineCheck:
    ok: bool
    worst_word: tuple
    worst_residual: float

    def __iter__(self):
        yield self.ok
        yield self.worst_word
        yield self.worst_residual


def build_q_family(tm: TransitionMatrix, m, rho) -> QFamily:
    rho = np.asarray(rho, dtype=float)
    m = np.asarray(m, dtype=float)
    if rho.shape != (tm.size,) or np.any(rho <= 0):
        raise RhoNotFullSupport("rho must be positive on every letter")
    h = np.sqrt(rho)
    s = h[:, None] / h[None, :] * m
    q = np.moveaxis(s[:, :, None] * tm.t, 2, 0).copy()
    return QFamily(tm.kappa, rho, m, q, h)


def _decode(index: int, length: int, base: int) -> tuple:
    digits = []
    for _ in range(length):
        index, r = divmod(index, base)
        digits.append(r)
    return tuple(reversed(digits))


def _lex_first(candidates):
    """Among ``(residual, word)`` pairs keep the maximal residual, ties by word."""
    best = max(r for r, _ in candidates)
    return best, min(w for r, w in candidates if r == best)


def check_line_invariance(
    tm: TransitionMatrix,
    m,
    rho,
    eps_cond: float = EPS_COND,
    max_len: int | None = None,
    form: str = "crit",
    eps_stat: float = _EPS_STAT,
    budget: int = WORD_BUDGET,
) -> LineCheck:
    """Is the stationary ``(rho, M)`` chain on the line invariant?

    Scans every word of length ``1..max_len`` (default ``kappa + 2``, which
    is enough for all lengths). ``form="direct"`` compares
    ``rho_{x1} prod M`` with ``rho^(1/2) Q_x1...Q_xm rho^(1/2)^t``;
    ``form="crit"`` checks the equivalent recursive form in which each word
    is compared with its tail. Residuals are absolute.
    """
    if form not in ("crit", "direct"):
        raise ValueError(f"unknown form {form!r}")
    fam = build_q_family(tm, m, rho)
    rho, m = fam.rho, fam.m
    stat = float(np.max(np.abs(rho @ m - rho)))
    if stat > eps_stat:
        raise RhoNotStationary(f"rho M - rho has size {stat:.3e}")
    k = tm.size
    max_len = k + 1 if max_len is None else int(max_len)
    total = sum(k**j for j in range(1, max_len + 1))
    if total > budget:
        raise BudgetExceeded(total, budget)

    h, q = fam.rho_half, fam.q
    # words are built by prepending letters: S[w] = Q_w rho^(1/2)^t
    s = np.einsum("xij,j->xi", q, h)  # level 1
    rhs = s @ h
    lhs = rho.copy()
    first = np.arange(k)
    r = np.abs(lhs - rhs)
    candidates = [(float(r.max()), _decode(int(np.argmax(r)), 1, k))]
    for length in range(2, max_len + 1):
        n = s.shape[0]
        s = np.einsum("xij,nj->xni", q, s).reshape(k * n, k)
        new_rhs = s @ h
        # coefficient rho_x M[x, w1] / rho_{w1}
        coef = (rho[:, None] * m[:, first] / rho[first][None, :]).reshape(-1)
        tail_rhs = np.tile(rhs, k)
        if form == "crit":
            r = np.abs(new_rhs - coef * tail_rhs)
        else:
            lhs = coef * np.tile(lhs, k)
            r = np.abs(lhs - new_rhs)
        rhs = new_rhs
        first = np.repeat(np.arange(k), n)
        i = int(np.argmax(r))
        candidates.append((float(r[i]), _decode(i, length, k)))
    worst, word = _lex_first(candidates)
    return LineCheck(worst <= eps_cond, word, worst)


def check_cyclic_line_invariance(
    tm: TransitionMatrix,
    m,
    n: int,
    eps_cond: float = EPS_COND,
    budget: int = 65_536,
) -> LineCheck:
    """Is the cyclic ``M`` chain on ``n`` cells invariant?

    Exhaustive over the ``(kappa+1)**n`` words: the cyclic product of ``M``
    must equal the trace of the word product of the ``Q`` matrices. Traces
    are blind to the diagonal conjugation by ``rho``, so the uniform
    reference vector is used.
    """
    n = int(n)
    if n < 1:
        raise ValueError("n must be >= 1")
    k = tm.size
    if k**n > budget:
        raise BudgetExceeded(k**n, budget)
    fam = build_q_family(tm, m, np.full(k, 1.0 / k))
    q, m = fam.q, fam.m
    p = q.copy()  # p[w] = Q_w for words of the current length
    lhs = np.ones(k)
    first = np.arange(k)
    last = np.arange(k)
    for _ in range(1, n):
        cnt = p.shape[0]
        p = np.einsum("wij,xjl->wxil", p, q).reshape(cnt * k, k, k)
        lhs = (lhs[:, None] * m[last, :]).reshape(-1)
        first = np.repeat(first, k)
        last = np.tile(np.arange(k), cnt)
    lhs = lhs * m[last, first]
    rhs = np.trace(p, axis1=1, axis2=2)
    r = np.abs(lhs - rhs)
    i = int(np.argmax(r))
    return LineCheck(float(r[i]) <= eps_cond, _decode(i, n, k), float(r[i]))


# ------------------------------------------------------ spectral necessities


def numerical_rank(a, eps_rank: float = EPS_RANK) -> int:
    sv = np.linalg.svd(np.asarray(a, dtype=float), compute_uv=False)
    if sv[0] == 0:
        return 0
    return int(np.sum(sv > eps_rank * sv[0]))


def _max_eigenvalue(a) -> float:
    if np.all(a >= 0) and is_primitive(a):
        return perron(a).lam
    ev = np.linalg.eigvals(a)
    return float(ev[np.argmax(np.abs(ev))].real)


@dataclass(frozen=True)
class NecessityEntry:
    word: tuple
    perron_value: float
    cyclic_weight: float  # prod_i M[x_i, x_{i+1 mod l}]
    perron_ok: bool
    rank: int

    @property
    def rank_one(self) -> bool:
        return self.rank == 1


@dataclass(frozen=True)
class NecessityReport:
    entries: tuple

    @property
    def perron_pass(self) -> bool:
        """Necessary for invariance on the line."""
        return all(e.perron_ok for e in self.entries)

    @property
    def rank_one_pass(self) -> bool:
        """Necessary for invariance on infinitely many cycles."""
        return all(e.rank_one for e in self.entries)

    def ranks(self, length: int = 1) -> list:
        return [e.rank for e in self.entries if len(e.word) == length]


def spectral_necessity_report(
    tm: TransitionMatrix,
    m,
    rho,
    max_len: int = 1,
    eps_cond: float = EPS_COND,
    eps_rank: float = EPS_RANK,
) -> NecessityReport:
    """Perron value and numerical rank of every word product ``Q_w``.

    For an invariant chain on the line the Perron value of ``Q_w`` equals
    the cyclic weight of ``w`` under ``M``; invariance on infinitely many
    cycles further forces every ``Q_w`` to have rank one.
    """
    fam = build_q_family(tm, m, rho)
    k = tm.size
    entries = []
    for length in range(1, max_len + 1):
        for w in itertools.product(range(k), repeat=length):
            a = fam.product(w)
            me = _max_eigenvalue(a)
            cw = float(np.prod([fam.m[w[i], w[(i + 1) % length]] for i in range(length)]))
            ok = bool(rel_residual(me, cw) <= eps_cond or abs(me - cw) <= eps_cond)
            entries.append(NecessityEntry(w, me, cw, ok, numerical_rank(a, eps_rank)))
    return NecessityReport(tuple(entries))


def check_iid_sufficient(tm: TransitionMatrix, rho, eps_cond: float = EPS_COND) -> bool:
    """``rho^(1/2) Q_x = rho_x rho^(1/2)`` for every letter (product law ``rho``).

    Equivalently ``sum_i rho_i T(i,j,x) = rho_x`` for all ``j, x``: a
    sufficient condition for the i.i.d. law to be invariant on the line.
    """
    rho = np.asarray(rho, dtype=float)
    fam = build_q_family(tm, np.tile(rho, (tm.size, 1)), rho)
    h = fam.rho_half
    lhs = np.einsum("i,xij->xj", h, fam.q)
    return bool(np.max(np.abs(lhs - rho[:, None] * h[None, :])) <= eps_cond)


# ---------------------------------------------------------- two-letter case


@dataclass(frozen=True)
class Kappa1Classification:
    """Which of the two-letter invariance conditions hold.

    ``cond_i`` is the quartic identity (Markov invariant on the line and on
    the zigzag); ``cond_ii_a``/``cond_ii_b`` are the two product-measure
    branches. ``m_candidates`` lists the kernels solving the two
    constraints attached to ``cond_i``.
    """

    cond_i: bool
    residual_i: float
    cond_ii_a: bool
    residual_ii_a: float
    cond_ii_b: bool
    residual_ii_b: float
    rho0: float | None
    m_candidates: tuple

    @property
    def cond_ii(self) -> bool:
        return self.cond_ii_a or self.cond_ii_b

    @property
    def markov_on_line(self) -> bool:
        return self.cond_i or self.cond_ii


def kappa1_rho0(tm: TransitionMatrix, tie_eps: float = 1e-12) -> float:
    """First marginal of the invariant product law in the two-letter case."""
    t = tm.t
    t000, t110, t010, t100 = t[0, 0, 0], t[1, 1, 0], t[0, 1, 0], t[1, 0, 0]
    den = t000 + t110 - t010 - t100
    if abs(den) > tie_eps:
        return float((t000 * t110 - t010 * t100) / den)
    return float(t110 / (1.0 + t110 - t010))


def _kappa1_kernels(t: np.ndarray) -> tuple:
    # M00 T001 = M11 T110 and T010 T100 M10 M01 = T000 T110 M00 M11,
    # with M01 = 1 - M00, M10 = 1 - M11; write M11 = r M00
    r = t[0, 0, 1] / t[1, 1, 0]
    p = t[0, 1, 0] * t[1, 0, 0]
    a = r * (p - t[0, 0, 0] * t[1, 1, 0])
    b = -p * (1.0 + r)
    c = p
    if abs(a) < 1e-14:
        roots = [c / -b]
    else:
        disc = b * b - 4 * a * c
        if disc < 0:
            return ()
        sq = np.sqrt(disc)
        roots = [(-b - sq) / (2 * a), (-b + sq) / (2 * a)]
    out = []
    for x in roots:
        y = r * x
        if 0 < x < 1 and 0 < y < 1:
            out.append(np.array([[x, 1 - x], [1 - y, y]]))
    return tuple(out)


def classify_kappa1(tm: TransitionMatrix, eps_cond: float = EPS_COND) -> Kappa1Classification:
    if tm.kappa != 1:
        raise KappaMismatch(f"two-letter classification needs kappa=1, got {tm.kappa}")
    if not is_positive_rate(tm):
        raise NotPositiveRate("two-letter classification needs a positive-rate TM")
    t = tm.t
    r_i = float(
        rel_residual(
            t[0, 0, 0] * t[1, 1, 0] * t[1, 0, 1] * t[0, 1, 1],
            t[1, 1, 1] * t[0, 0, 1] * t[0, 1, 0] * t[1, 0, 0],
        )
    )
    r_a = float(rel_residual(t[0, 1, 1] * t[1, 0, 0], t[1, 1, 0] * t[0, 0, 1]))
    r_b = float(rel_residual(t[1, 0, 1] * t[0, 1, 0], t[1, 1, 0] * t[0, 0, 1]))
    ok_i, ok_a, ok_b = r_i <= eps_cond, r_a <= eps_cond, r_b <= eps_cond
    rho0 = kappa1_rho0(tm) if (ok_a or ok_b) else None
    kernels = _kappa1_kernels(t) if ok_i else ()
    return Kappa1Classification(ok_i, r_i, ok_a, r_a, ok_b, r_b, rho0, kernels)


# ------------------------------------------------------------ Markov-2 lift


@dataclass(frozen=True)
class Markov2Lift:
    """Zigzag law with memory two induced by an invariant chain on the line.

    ``d[a, c]`` is the law of the cell below ``a``; ``u3[a, c, b]`` the law
    of the right neighbour ``b`` of ``a`` given ``a`` and ``c``.
    """

    d: np.ndarray
    u3: np.ndarray
    zero_rows: tuple


def markov2_lift(tm: TransitionMatrix, m) -> Markov2Lift:
    m = np.asarray(m, dtype=float)
    joint = m[:, :, None] * tm.t  # joint[a, b, c] = M[a,b] T(a,b,c)
    d = joint.sum(axis=1)
    safe = np.where(d > 0, d, 1.0)
    u3 = np.where(d[:, :, None] > 0, joint.transpose(0, 2, 1) / safe[:, :, None], 0.0)
    zero = tuple((int(a), int(c)) for a, c in np.argwhere(d <= 0))
    return Markov2Lift(d, u3, zero)
