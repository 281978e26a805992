"""Shared vocabulary: transition matrices, kernels, probability vectors.

A transition matrix ``t`` of a two-neighbour PCA on the alphabet
``{0, ..., kappa}`` is stored as a dense array of shape ``(K, K, K)`` with
``K = kappa + 1`` and ``t[a, b, c]`` the probability that a cell becomes
``c`` when its left/right parents are ``a`` and ``b``.

Kernels (``D``, ``U``, ``M``) and probability vectors are plain
``numpy.ndarray`` objects; :func:`check_kernel` and :func:`check_prob`
validate them at module boundaries.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

__all__ = [
    "EPS_STOCH",
    "PCAError",
    "NegativeEntry",
    "RowSumViolation",
    "ShapeMismatch",
    "NotPrimitive",
    "NoConvergence",
    "SingularNormalization",
    "ZeroDenominator",
    "EtaNotFullSupport",
    "ZeroPairProbability",
    "RhoNotFullSupport",
    "RhoNotStationary",
    "BudgetExceeded",
    "WindowTooLarge",
    "KappaMismatch",
    "NotPositiveRate",
    "ResamplingExhausted",
    "ZeroProbabilityConfig",
    "TransitionMatrix",
    "validate_tm",
    "is_positive_rate",
    "check_cond_tauxg",
    "check_kernel",
    "check_prob",
    "product_tm",
    "uniform_tm",
    "rank_one",
    "tm_to_json",
    "tm_from_json",
    "load_tm",
    "save_tm",
]

EPS_STOCH = 1e-12


# ---------------------------------------------------------------- errors


class PCAError(Exception):
    """Base class of every error raised by this package."""


class NegativeEntry(PCAError, ValueError):
    def __init__(self, index):
        self.index = tuple(int(i) for i in index)
        super().__init__(f"negative entry at {self.index}")


class RowSumViolation(PCAError, ValueError):
    def __init__(self, a, b, total):
        self.a, self.b, self.total = int(a), int(b), float(total)
        super().__init__(f"row ({self.a},{self.b}) sums to {self.total!r}, not 1")


class ShapeMismatch(PCAError, ValueError):
    pass


class NotPrimitive(PCAError, ArithmeticError):
    pass


class NoConvergence(PCAError, ArithmeticError):
    def __init__(self, max_iter, residual):
        self.max_iter, self.residual = int(max_iter), float(residual)
        super().__init__(
            f"no convergence after {self.max_iter} iterations (residual {self.residual:.3e})"
        )


class SingularNormalization(PCAError, ArithmeticError):
    pass


class ZeroDenominator(PCAError, ValueError):
    def __init__(self, index, what="denominator"):
        self.index = tuple(int(i) for i in index)
        super().__init__(f"zero {what} at {self.index}")


class EtaNotFullSupport(PCAError, ValueError):
    pass


class ZeroPairProbability(PCAError, ValueError):
    def __init__(self, a, b):
        self.a, self.b = int(a), int(b)
        super().__init__(f"pair probability vanishes at ({self.a},{self.b})")


class RhoNotFullSupport(PCAError, ValueError):
    pass


class RhoNotStationary(PCAError, ValueError):
    pass


class BudgetExceeded(PCAError):
    def __init__(self, size, budget):
        self.size, self.budget = int(size), int(budget)
        super().__init__(f"problem size {self.size} exceeds budget {self.budget}")


class WindowTooLarge(PCAError, ValueError):
    pass


class KappaMismatch(PCAError, ValueError):
    pass


class NotPositiveRate(PCAError, ValueError):
    pass


class ResamplingExhausted(PCAError):
    pass


class ZeroProbabilityConfig(PCAError, ValueError):
    pass


# ------------------------------------------------------- transition matrix


@dataclass(frozen=True, eq=False)
class TransitionMatrix:
    """Validated, read-only PCA transition matrix.

    Build instances with :func:`validate_tm`; the constructor itself does
    not check anything.
    """

    t: np.ndarray

    @property
    def kappa(self) -> int:
        return self.t.shape[0] - 1

    @property
    def size(self) -> int:
        return self.t.shape[0]

    def __getitem__(self, idx):
        return self.t[idx]

    def __array__(self, dtype=None, copy=None):
        return self.t if dtype is None else self.t.astype(dtype)

    def __eq__(self, other):
        if not isinstance(other, TransitionMatrix):
            return NotImplemented
        return self.t.shape == other.t.shape and bool(np.array_equal(self.t, other.t))

    def __hash__(self):
        return hash(self.t.tobytes())

    def __repr__(self):
        return f"TransitionMatrix(kappa={self.kappa})"


def _renorm_threshold(size: int) -> float:
    # a few ulps per summand: a row already divided by its sum is left alone
    return 4.0 * size * np.finfo(float).eps


def validate_tm(raw, eps_stoch: float = EPS_STOCH, kappa: int | None = None) -> TransitionMatrix:
    """Check and normalise a raw ``(K, K, K)`` tensor.

    Rows whose sum deviates from 1 by less than ``eps_stoch`` are divided by
    their sum; larger deviations raise :class:`RowSumViolation`. Validating
    the output again returns a bit-identical tensor.
    """
    if isinstance(raw, TransitionMatrix):
        raw = raw.t
    t = np.array(raw, dtype=float)
    if t.ndim != 3 or not (t.shape[0] == t.shape[1] == t.shape[2]) or t.shape[0] < 2:
        raise ShapeMismatch(f"expected shape (K, K, K) with K >= 2, got {t.shape}")
    if kappa is not None and t.shape[0] != kappa + 1:
        raise ShapeMismatch(f"kappa={kappa} but tensor has shape {t.shape}")
    if not np.all(np.isfinite(t)):
        bad = np.argwhere(~np.isfinite(t))[0]
        raise ShapeMismatch(f"non-finite entry at {tuple(int(i) for i in bad)}")
    if np.any(t < 0):
        raise NegativeEntry(np.argwhere(t < 0)[0])
    sums = t.sum(axis=2)
    dev = np.abs(sums - 1.0)
    if np.any(dev >= eps_stoch):
        a, b = np.argwhere(dev >= eps_stoch)[0]
        raise RowSumViolation(a, b, sums[a, b])
    fix = dev > _renorm_threshold(t.shape[0])
    if np.any(fix):
        t[fix] /= sums[fix][:, None]
    t.setflags(write=False)
    return TransitionMatrix(t)


def is_positive_rate(tm: TransitionMatrix) -> bool:
    return bool(np.all(tm.t > 0))


def check_cond_tauxg(tm: TransitionMatrix) -> bool:
    """``T(a,b,0) > 0`` for every pair and ``T(0,0,c) > 0`` for every ``c``."""
    return bool(np.all(tm.t[:, :, 0] > 0) and np.all(tm.t[0, 0, :] > 0))


# ------------------------------------------------------ kernels and vectors


def check_kernel(m, eps_stoch: float = EPS_STOCH, size: int | None = None) -> np.ndarray:
    """Return ``m`` as a float array after checking it is row-stochastic."""
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ShapeMismatch(f"kernel must be square, got shape {m.shape}")
    if size is not None and m.shape[0] != size:
        raise ShapeMismatch(f"kernel of size {m.shape[0]}, expected {size}")
    if not np.all(np.isfinite(m)):
        raise ShapeMismatch("kernel has non-finite entries")
    if np.any(m < 0):
        raise NegativeEntry(np.argwhere(m < 0)[0])
    sums = m.sum(axis=1)
    bad = np.abs(sums - 1.0) >= eps_stoch
    if np.any(bad):
        a = int(np.argmax(bad))
        raise RowSumViolation(a, -1, sums[a])
    return m


def check_prob(p, eps_stoch: float = EPS_STOCH, size: int | None = None) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if p.ndim != 1:
        raise ShapeMismatch(f"probability vector must be 1-d, got shape {p.shape}")
    if size is not None and p.shape[0] != size:
        raise ShapeMismatch(f"vector of length {p.shape[0]}, expected {size}")
    if not np.all(np.isfinite(p)):
        raise ShapeMismatch("vector has non-finite entries")
    if np.any(p < 0):
        raise NegativeEntry(np.argwhere(p < 0)[0])
    if abs(p.sum() - 1.0) >= eps_stoch:
        raise RowSumViolation(-1, -1, p.sum())
    return p


def rank_one(rho) -> np.ndarray:
    """The kernel whose rows all equal ``rho`` (the i.i.d. Markov kernel)."""
    rho = np.asarray(rho, dtype=float)
    return np.tile(rho, (rho.size, 1))


def product_tm(rho) -> TransitionMatrix:
    """``T(a,b,c) = rho_c``: every cell forgets its parents."""
    rho = np.asarray(rho, dtype=float)
    k = rho.size
    return validate_tm(np.broadcast_to(rho, (k, k, k)))


def uniform_tm(kappa: int) -> TransitionMatrix:
    k = kappa + 1
    return validate_tm(np.full((k, k, k), 1.0 / k))


# -------------------------------------------------------------- JSON files


def _reject_constant(name):
    raise ValueError(f"non-finite JSON constant {name!r} is not allowed")


def tm_to_json(tm: TransitionMatrix, **extra) -> str:
    doc = {"kappa": tm.kappa, "t": tm.t.tolist()}
    doc.update(extra)
    return json.dumps(doc, indent=1, sort_keys=False, allow_nan=False) + "\n"


def tm_from_json(text: str, eps_stoch: float = EPS_STOCH) -> TransitionMatrix:
    """Parse ``{"kappa": k, "t": [[[...]]]}``; NaN and Infinity are rejected."""
    doc = json.loads(text, parse_constant=_reject_constant)
    if not isinstance(doc, dict) or "kappa" not in doc or "t" not in doc:
        raise ShapeMismatch('expected an object with keys "kappa" and "t"')
    kappa = doc["kappa"]
    if not isinstance(kappa, int) or isinstance(kappa, bool) or kappa < 1:
        raise ShapeMismatch(f"kappa must be an integer >= 1, got {kappa!r}")
    try:
        t = np.array(doc["t"], dtype=float)
    except (TypeError, ValueError) as exc:
        raise ShapeMismatch(f"ragged or non-numeric tensor: {exc}") from None
    for v in t.flat:
        if not math.isfinite(v):
            raise ShapeMismatch("non-finite entry in tensor")
    return validate_tm(t, eps_stoch, kappa=kappa)


def load_tm(path, eps_stoch: float = EPS_STOCH) -> TransitionMatrix:
    return tm_from_json(Path(path).read_text(), eps_stoch)


def save_tm(path, tm: TransitionMatrix, **extra) -> None:
    Path(path).write_text(tm_to_json(tm, **extra))
