"""Seeded test instances.

Every generator is a pure function of its arguments: the same inputs give
bit-identical arrays. Rejection loops reseed with ``(seed, attempt)``.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import null_space

from .core import ResamplingExhausted, TransitionMatrix, validate_tm
from .hz import check_cond_gibbs1, gibbs1_rhs

__all__ = [
    "MAX_RESAMPLES",
    "random_kernel",
    "random_positive_tm",
    "gen_commuting_pair",
    "gen_cond3_tm",
    "gen_symmetric_tm",
    "gen_kappa1_case2",
]

MAX_RESAMPLES = 1000
_LOW = 0.05  # keeps drawn entries away from zero


def _rng(seed, attempt: int = 0) -> np.random.Generator:
    return np.random.default_rng([int(seed), attempt])


def random_kernel(size: int, rng: np.random.Generator) -> np.ndarray:
    k = rng.uniform(_LOW, 1.0, (size, size))
    return k / k.sum(axis=1, keepdims=True)


def random_positive_tm(kappa: int, seed) -> TransitionMatrix:
    rng = _rng(seed)
    k = kappa + 1
    t = rng.uniform(_LOW, 1.0, (k, k, k))
    return validate_tm(t / t.sum(axis=2, keepdims=True))


def gen_commuting_pair(kappa: int, seed, alpha=None, beta=None) -> tuple[np.ndarray, np.ndarray]:
    """``D = a I + (1-a) K`` and ``U = b I + (1-b) K`` for a positive kernel ``K``."""
    rng = _rng(seed)
    k = kappa + 1
    kern = random_kernel(k, rng)
    a = rng.uniform(0.0, 1.0) if alpha is None else float(alpha)
    b = rng.uniform(0.0, 1.0) if beta is None else float(beta)
    eye = np.eye(k)
    return a * eye + (1 - a) * kern, b * eye + (1 - b) * kern


def gen_cond3_tm(kappa: int, seed, eps: float = 1e-12) -> TransitionMatrix:
    """Positive-rate TM satisfying the three-slice factorisation exactly.

    Any tensor of the form ``f(a,b) g(a,c) h(b,c)`` satisfies the identity,
    and row normalisation only rescales ``f``, so completing a random
    positive tensor and renormalising keeps the identity.
    """
    k = kappa + 1
    for attempt in range(MAX_RESAMPLES):
        rng = _rng(seed, attempt)
        raw = rng.uniform(_LOW, 1.0, (k, k, k))
        t = gibbs1_rhs(raw)
        t = t / t.sum(axis=2, keepdims=True)
        if not np.all(np.isfinite(t)) or np.any(t <= 0):
            continue
        tm = validate_tm(t)
        if check_cond_gibbs1(tm, eps).ok:
            return tm
    raise ResamplingExhausted(f"no valid completion after {MAX_RESAMPLES} draws")


def _eq_mm_directions(k: int, rho: np.ndarray) -> np.ndarray:
    """Basis of symmetric perturbations keeping rows stochastic and ``rho`` averaged."""
    pairs = [(a, b) for a in range(k) for b in range(a, k)]
    nvar = len(pairs) * k
    col = {p: i for i, p in enumerate(pairs)}

    def var(a, b, c):
        return col[(min(a, b), max(a, b))] * k + c

    rows = []
    for p in pairs:
        r = np.zeros(nvar)
        r[[col[p] * k + c for c in range(k)]] = 1.0
        rows.append(r)
    for j in range(k):
        for x in range(k):
            r = np.zeros(nvar)
            for i in range(k):
                r[var(i, j, x)] += rho[i]
            rows.append(r)
    basis = null_space(np.array(rows))
    full = np.zeros((basis.shape[1], k, k, k))
    for a in range(k):
        for b in range(k):
            for c in range(k):
                full[:, a, b, c] = basis[var(a, b, c)]
    return full


def gen_symmetric_tm(kappa: int, seed, rho=None, spread: float = 0.5) -> TransitionMatrix:
    """Positive-rate TM with ``T(a,b,.) == T(b,a,.)`` exactly.

    With ``rho`` given, the TM also satisfies ``sum_i rho_i T(i,j,x) = rho_x``
    (so the product law ``rho`` is invariant); ``spread`` in ``[0, 1)`` sets
    how far it sits from the product TM ``T(a,b,x) = rho_x``.
    """
    rng = _rng(seed)
    k = kappa + 1
    if rho is None:
        t = rng.uniform(_LOW, 1.0, (k, k, k))
        t = 0.5 * (t + t.transpose(1, 0, 2))
        t = t / t.sum(axis=2, keepdims=True)
        # rows (a,b) and (b,a) now hold identical floats
        return validate_tm(t)
    rho = np.asarray(rho, dtype=float)
    base = np.broadcast_to(rho, (k, k, k)).copy()
    dirs = _eq_mm_directions(k, rho)
    if dirs.shape[0] == 0:
        return validate_tm(base)
    p = np.tensordot(rng.normal(size=dirs.shape[0]), dirs, axes=1)
    neg = p < 0
    room = np.min(base[neg] / -p[neg]) if neg.any() else 1.0
    t = base + spread * room * p
    t = 0.5 * (t + t.transpose(1, 0, 2))
    return validate_tm(t)


def gen_kappa1_case2(seed, branch: int = 1, margin: float = 1e-3) -> tuple[TransitionMatrix, np.ndarray]:
    """Two-letter positive-rate TM with an invariant product law.

    ``branch=1`` enforces ``T011 T100 = T110 T001``, ``branch=2`` enforces
    ``T101 T010 = T110 T001``. Instances close to the quartic identity
    (where a genuine Markov law takes over) are rejected with relative
    ``margin``. Returns the TM and the product marginal ``rho``.
    """
    from .line import kappa1_rho0

    if branch not in (1, 2):
        raise ValueError("branch must be 1 or 2")
    for attempt in range(MAX_RESAMPLES):
        rng = _rng(seed, attempt)
        # free parameters: P(next=1 | parents)
        p = rng.uniform(_LOW, 1.0 - _LOW, 4)
        t1 = {(0, 0): p[0], (0, 1): p[1], (1, 0): p[2], (1, 1): p[3]}
        t0 = {ab: 1.0 - v for ab, v in t1.items()}
        # solve the branch constraint for one entry
        if branch == 1:
            # T011 T100 = T110 T001  ->  T011 = T110 T001 / T100
            v = t0[(1, 1)] * t1[(0, 0)] / t0[(1, 0)]
            if not 0 < v < 1:
                continue
            t1[(0, 1)], t0[(0, 1)] = v, 1.0 - v
        else:
            # T101 T010 = T110 T001  ->  T101 = T110 T001 / T010
            v = t0[(1, 1)] * t1[(0, 0)] / t0[(0, 1)]
            if not 0 < v < 1:
                continue
            t1[(1, 0)], t0[(1, 0)] = v, 1.0 - v
        t = np.empty((2, 2, 2))
        for (a, b), v1 in t1.items():
            t[a, b, 1] = v1
            t[a, b, 0] = t0[(a, b)]
        if np.any(t < _LOW / 10):
            continue
        lhs = t[0, 0, 0] * t[1, 1, 0] * t[1, 0, 1] * t[0, 1, 1]
        rhs = t[1, 1, 1] * t[0, 0, 1] * t[0, 1, 0] * t[1, 0, 0]
        if abs(lhs - rhs) <= margin * max(lhs, rhs):
            continue
        tm = validate_tm(t)
        r0 = kappa1_rho0(tm)
        if not margin < r0 < 1 - margin:
            continue
        return tm, np.array([r0, 1.0 - r0])
    raise ResamplingExhausted(f"no case-(ii) instance after {MAX_RESAMPLES} draws")
