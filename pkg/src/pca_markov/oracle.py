"""Exact ground truth on small cylinders.

The automaton on a cycle of ``n`` cells is a finite Markov chain on
``(kappa+1)**n`` configurations. Configuration ``(x_0, ..., x_{n-1})`` has
code ``sum_i x_i (kappa+1)**i``; :meth:`CylinderDistribution.tensor`
returns the same numbers as an array with one axis per cell.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse.csgraph import connected_components

from .core import (
    BudgetExceeded,
    NoConvergence,
    NotPrimitive,
    TransitionMatrix,
    ZeroProbabilityConfig,
)
from .spectral import perron

__all__ = [
    "EPS_ORACLE",
    "STATE_BUDGET",
    "DENSE_LIMIT",
    "CylinderDistribution",
    "HZDistribution",
    "CMCFit",
    "HZCMCFit",
    "pca_cylinder_operator",
    "apply_cylinder_operator",
    "exact_stationary",
    "closed_classes",
    "stationary_per_class",
    "exact_hz_distribution",
    "cmc_weights",
    "hzcmc_weights",
    "is_cmc",
    "is_hzcmc",
]

EPS_ORACLE = 1e-10
STATE_BUDGET = 4**8
DENSE_LIMIT = 4096
JOINT_BUDGET = 2**22
_POWER_MAX_ITER = 100_000


def _states(tm: TransitionMatrix, n: int, budget: int) -> int:
    if n < 1:
        raise ValueError("n must be >= 1")
    size = tm.size**n
    if size > budget:
        raise BudgetExceeded(size, budget)
    return size


def _update_operands(t: np.ndarray, n: int) -> list:
    # axis i is the old cell x_i, axis n+i the new cell y_i
    ops = []
    for i in range(n):
        ops += [t, [i, (i + 1) % n, n + i]]
    return ops


def _to_tensor(p: np.ndarray, k: int, n: int) -> np.ndarray:
    return p.reshape((k,) * n, order="F")


def _from_tensor(a: np.ndarray) -> np.ndarray:
    return a.reshape(-1, order="F")


@dataclass(frozen=True)
class CylinderDistribution:
    n: int
    kappa: int
    p: np.ndarray

    @property
    def size(self) -> int:
        return self.kappa + 1

    def tensor(self) -> np.ndarray:
        return _to_tensor(self.p, self.size, self.n)

    def code(self, word) -> int:
        return int(sum(int(x) * self.size**i for i, x in enumerate(word)))

    def prob(self, word) -> float:
        return float(self.p[self.code(word)])

    def rotation_residual(self) -> float:
        """Largest change of the law under a one-cell rotation."""
        a = self.tensor()
        return float(np.max(np.abs(a - np.moveaxis(a, 0, -1))))


@dataclass(frozen=True)
class HZDistribution:
    """Stationary joint law of two consecutive rows on the cylinder.

    ``joint[w, v]`` is the probability that the top row has code ``w`` and
    the next row code ``v``.
    """

    n: int
    kappa: int
    joint: np.ndarray

    @property
    def size(self) -> int:
        return self.kappa + 1

    def top(self) -> np.ndarray:
        return self.joint.sum(axis=1)

    def bottom(self) -> np.ndarray:
        return self.joint.sum(axis=0)

    def zigzag_tensor(self) -> np.ndarray:
        """Axes ordered ``a_0, b_0, a_1, b_1, ...`` along the zigzag."""
        k, n = self.size, self.n
        a = self.joint.reshape((k,) * (2 * n), order="F")
        order = [ax for i in range(n) for ax in (i, n + i)]
        return np.transpose(a, order)


def pca_cylinder_operator(tm: TransitionMatrix, n: int, budget: int = DENSE_LIMIT) -> np.ndarray:
    """Dense configuration transition matrix ``P[w, v] = prod_i T(w_i, w_{i+1}, v_i)``."""
    size = _states(tm, n, budget)
    a = np.einsum(*_update_operands(tm.t, n), list(range(2 * n)), optimize="greedy")
    return a.reshape(size, size, order="F")


def apply_cylinder_operator(tm: TransitionMatrix, n: int, p) -> np.ndarray:
    """``p @ P`` without forming ``P``."""
    k = tm.size
    a = _to_tensor(np.asarray(p, dtype=float), k, n)
    out = np.einsum(
        a, list(range(n)), *_update_operands(tm.t, n), list(range(n, 2 * n)), optimize="greedy"
    )
    return _from_tensor(out)


def _closed_classes_dense(p: np.ndarray) -> list:
    ncomp, labels = connected_components(p > 0, directed=True, connection="strong")
    outgoing = np.zeros(ncomp, dtype=bool)
    rows, cols = np.nonzero(p > 0)
    leak = labels[rows] != labels[cols]
    outgoing[np.unique(labels[rows[leak]])] = True
    return [np.flatnonzero(labels == c) for c in range(ncomp) if not outgoing[c]]


def closed_classes(tm: TransitionMatrix, n: int, budget: int = DENSE_LIMIT) -> list:
    """Closed communicating classes of the configuration chain (state codes)."""
    return _closed_classes_dense(pca_cylinder_operator(tm, n, budget))


def _solve_dense(p: np.ndarray, states=None) -> np.ndarray:
    if states is not None:
        p = p[np.ix_(states, states)]
    size = p.shape[0]
    a = np.eye(size) - p.T
    a[-1, :] = 1.0
    b = np.zeros(size)
    b[-1] = 1.0
    return np.linalg.solve(a, b)


def exact_stationary(
    tm: TransitionMatrix,
    n: int,
    eps_oracle: float = EPS_ORACLE,
    budget: int = STATE_BUDGET,
    dense_limit: int = DENSE_LIMIT,
) -> CylinderDistribution:
    """Unique stationary law of the automaton on ``n`` cells.

    Dense LU solve up to ``dense_limit`` states, matrix-free power
    iteration beyond. Raises :class:`NotPrimitive` when the chain has
    several closed classes (see :func:`stationary_per_class`).
    """
    size = _states(tm, n, budget)
    if size <= dense_limit:
        p = pca_cylinder_operator(tm, n, dense_limit)
        classes = _closed_classes_dense(p)
        if len(classes) != 1:
            raise NotPrimitive(f"configuration chain has {len(classes)} closed classes")
        pi = _solve_dense(p)
        pi = np.clip(pi, 0.0, None)
        pi /= pi.sum()
        res = float(np.max(np.abs(pi @ p - pi)))
    else:
        pi = np.full(size, 1.0 / size)
        res = np.inf
        for _ in range(_POWER_MAX_ITER):
            nxt = apply_cylinder_operator(tm, n, pi)
            nxt /= nxt.sum()
            res = float(np.max(np.abs(nxt - pi)))
            pi = nxt
            if res <= eps_oracle * 1e-2:
                break
        res = float(np.max(np.abs(apply_cylinder_operator(tm, n, pi) - pi)))
    if res > eps_oracle:
        raise NoConvergence(0, res)
    return CylinderDistribution(n, tm.kappa, pi)


def stationary_per_class(tm: TransitionMatrix, n: int, budget: int = DENSE_LIMIT) -> list:
    """One stationary law per closed class, for chains with traps."""
    p = pca_cylinder_operator(tm, n, budget)
    out = []
    for states in _closed_classes_dense(p):
        sub = _solve_dense(p, states)
        full = np.zeros(p.shape[0])
        full[states] = np.clip(sub, 0.0, None)
        full /= full.sum()
        out.append(CylinderDistribution(n, tm.kappa, full))
    return out


def exact_hz_distribution(
    tm: TransitionMatrix,
    n: int,
    eps_oracle: float = EPS_ORACLE,
    budget: int = STATE_BUDGET,
    joint_budget: int = JOINT_BUDGET,
) -> HZDistribution:
    """Stationary law of a row together with its image one step later."""
    size = _states(tm, n, budget)
    if size * size > joint_budget:
        raise BudgetExceeded(size * size, joint_budget)
    pi = exact_stationary(tm, n, eps_oracle, budget)
    k = tm.size
    a = np.einsum(
        _to_tensor(pi.p, k, n),
        list(range(n)),
        *_update_operands(tm.t, n),
        list(range(2 * n)),
        optimize="greedy",
    )
    return HZDistribution(n, tm.kappa, a.reshape(size, size, order="F"))


# --------------------------------------------------------- weight formulas


def _cycle_tensor(mats: list) -> np.ndarray:
    """``prod_j mats[j][x_j, x_{j+1 mod L}]`` as a tensor with one axis per cell."""
    length = len(mats)
    ops = []
    for j, mat in enumerate(mats):
        ops += [mat, [j, (j + 1) % length]]
    return np.einsum(*ops, list(range(length)), optimize="greedy")


def cmc_weights(m, n: int) -> np.ndarray:
    """Cyclic chain law ``prod M / Trace(M^n)`` as a flat code vector."""
    m = np.asarray(m, dtype=float)
    w = _from_tensor(_cycle_tensor([m] * n))
    return w / np.trace(np.linalg.matrix_power(m, n))


def hzcmc_weights(d, u, n: int) -> np.ndarray:
    """Cyclic zigzag law ``prod D U / Trace((DU)^n)`` as a ``(N, N)`` joint."""
    d = np.asarray(d, dtype=float)
    u = np.asarray(u, dtype=float)
    k = d.shape[0]
    z = _cycle_tensor([d, u] * n)  # axes a_0 b_0 a_1 b_1 ...
    inv = np.argsort([ax for i in range(n) for ax in (i, n + i)])
    a = np.transpose(z, inv)  # axes a_0..a_{n-1}, b_0..b_{n-1}
    size = k**n
    return a.reshape(size, size, order="F") / np.trace(np.linalg.matrix_power(d @ u, n))


# ----------------------------------------------------------- structure tests


def _field_residual(a: np.ndarray) -> float:
    """Dependence of each cell's conditional law on non-neighbours of a cycle."""
    length = a.ndim
    if length < 4:
        return 0.0  # every other cell is a neighbour
    worst = 0.0
    for i in range(length):
        cond = a / a.sum(axis=i, keepdims=True)
        far = tuple(j for j in range(length) if j not in (i, (i - 1) % length, (i + 1) % length))
        spread = cond.max(axis=far) - cond.min(axis=far)
        worst = max(worst, float(spread.max()))
    return worst


def _edge_design(shape_len: int, k: int, kinds: list) -> np.ndarray:
    """Count matrix of edge-potential occurrences for every cycle configuration.

    ``kinds[j]`` selects which potential the edge ``(j, j+1)`` uses.
    """
    nkinds = max(kinds) + 1
    idx = np.indices((k,) * shape_len).reshape(shape_len, -1)
    n_conf = idx.shape[1]
    x = np.zeros((n_conf, nkinds * k * k + 1))
    rows = np.arange(n_conf)
    for j in range(shape_len):
        col = kinds[j] * k * k + idx[j] * k + idx[(j + 1) % shape_len]
        np.add.at(x, (rows, col), 1.0)
    x[:, -1] = 1.0
    return x


def _fit_potentials(a: np.ndarray, kinds: list) -> list:
    k = a.shape[0]
    x = _edge_design(a.ndim, k, kinds)
    y = np.log(a.reshape(-1))
    coef, *_ = np.linalg.lstsq(x, y, rcond=None)
    nk = max(kinds) + 1
    return [np.exp(coef[i * k * k : (i + 1) * k * k].reshape(k, k)) for i in range(nk)]


def _stochastic_gauge(w: np.ndarray) -> np.ndarray:
    sd = perron(w)
    r = sd.right
    return w * r[None, :] / (sd.lam * r[:, None])


@dataclass(frozen=True)
class CMCFit:
    ok: bool
    m: np.ndarray | None
    residual: float
    field_residual: float
    rank: int | None = None


@dataclass(frozen=True)
class HZCMCFit:
    ok: bool
    d: np.ndarray | None
    u: np.ndarray | None
    residual: float
    field_residual: float


def _positive(a: np.ndarray):
    if np.any(a <= 0):
        raise ZeroProbabilityConfig("structure tests need a strictly positive law")


def is_cmc(dist: CylinderDistribution, eps: float = EPS_ORACLE) -> CMCFit:
    """Is ``dist`` the law of a cyclic Markov chain?

    The cyclic Markov-field property (for ``n >= 4``) and a homogeneous
    edge-potential fit must both hold; the fitted kernel is returned in its
    unique row-stochastic gauge.
    """
    if dist.n < 3:
        raise ValueError("cyclic chain test needs n >= 3")
    a = dist.tensor()
    _positive(a)
    field = _field_residual(a)
    (w,) = _fit_potentials(a, [0] * dist.n)
    m = _stochastic_gauge(w)
    res = float(np.max(np.abs(cmc_weights(m, dist.n) - dist.p)))
    ok = res <= eps and field <= eps
    rank = int(np.sum(np.linalg.svd(m, compute_uv=False) > 1e-8 * np.abs(m).max()))
    return CMCFit(ok, m if ok else None, res, field, rank if ok else None)


def is_hzcmc(hz: HZDistribution, eps: float = EPS_ORACLE) -> HZCMCFit:
    """Is the two-row law a cyclic zigzag chain with kernels ``(D, U)``?

    The zigzag is treated as a cycle of ``2n`` cells with alternating
    edge potentials; kernels are returned in their row-stochastic gauge.
    """
    if hz.n < 3:
        raise ValueError("cyclic zigzag test needs n >= 3")
    z = hz.zigzag_tensor()
    _positive(z)
    field = _field_residual(z)
    wd, wu = _fit_potentials(z, [0, 1] * hz.n)
    w = wd @ wu
    sd = perron(w)
    alpha = sd.right
    beta = wu @ alpha
    d = wd * beta[None, :] / (sd.lam * alpha[:, None])
    u = wu * alpha[None, :] / beta[:, None]
    res = float(np.max(np.abs(hzcmc_weights(d, u, hz.n) - hz.joint)))
    ok = res <= eps and field <= eps
    return HZCMCFit(ok, d if ok else None, u if ok else None, res, field)
