"""Perron-Frobenius data of small primitive nonnegative matrices."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import NoConvergence, NotPrimitive, ShapeMismatch, SingularNormalization

__all__ = [
    "EPS_EIG",
    "MAX_ITER",
    "SpectralData",
    "is_primitive",
    "perron",
    "stationary_det",
]

EPS_EIG = 1e-12
MAX_ITER = 100_000

_CHECK_EVERY = 8


@dataclass(frozen=True)
class SpectralData:
    """Perron eigenvalue with its positive eigenvectors.

    ``left`` sums to one; ``right`` is scaled so that ``left @ right == 1``.
    ``residual`` is measured relative to ``lam`` (see :func:`perron`).
    """

    lam: float
    left: np.ndarray
    right: np.ndarray
    iterations: int
    residual: float


def is_primitive(a) -> bool:
    """Some power ``A^k`` with ``k <= n**2`` is entrywise positive.

    Boolean powers by repeated squaring; Wielandt's bound ``(n-1)**2 + 1``
    is below ``n**2`` so this is exact.
    """
    a = np.asarray(a)
    n = a.shape[0]
    b = (a > 0).astype(np.int64)
    p = b.copy()
    k = 1
    while True:
        if np.all(p > 0):
            return True
        if k >= n * n:
            return False
        p = np.minimum(p @ p, 1)
        k *= 2


def _residual(a, lam, left, right_unit):
    r1 = np.max(np.abs(left @ a - lam * left))
    r2 = np.max(np.abs(a @ right_unit - lam * right_unit))
    return max(r1, r2) / lam


def _start_vector(b: np.ndarray) -> np.ndarray:
    # dense eigensolver guess; power iteration below refines and verifies it,
    # which matters when the second eigenvalue is close to the first
    n = b.shape[0]
    flat = np.full(n, 1.0 / n)
    try:
        w, v = np.linalg.eig(b)
    except np.linalg.LinAlgError:
        return flat
    x = np.abs(np.real(v[:, np.argmax(np.real(w))]))
    if not np.all(np.isfinite(x)) or np.any(x <= 0):
        return flat
    return x / x.sum()


def perron(a, eps_eig: float = EPS_EIG, max_iter: int = MAX_ITER) -> SpectralData:
    """Perron eigenvalue and eigenvectors of a primitive nonnegative matrix.

    Power iteration on ``A`` and ``A.T`` with renormalisation at every step,
    started from a dense eigensolver estimate.
    Converged when ``max(|l A - lam l|, |A r - lam r|) / lam <= eps_eig``
    with ``l`` and ``r`` both normalised to unit sum; the ratio keeps the
    stopping rule invariant under ``A -> c A``.
    """
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ShapeMismatch(f"square matrix expected, got {a.shape}")
    if np.any(a < 0) or not np.all(np.isfinite(a)):
        raise ShapeMismatch("matrix must be finite and nonnegative")
    if not is_primitive(a):
        raise NotPrimitive("matrix has no entrywise positive power")
    scale = a.max()
    b = a / scale
    left = _start_vector(b.T)
    right = _start_vector(b)
    res = np.inf
    lam = 1.0
    for it in range(1, max_iter + 1):
        left = left @ b
        left /= left.sum()
        right = b @ right
        right /= right.sum()
        if it % _CHECK_EVERY == 0 or it == max_iter:
            lam = float((left @ b).sum())
            res = _residual(b, lam, left, right)
            if res <= eps_eig:
                break
    else:
        raise NoConvergence(max_iter, res)
    # polish the eigenvalue against the final pair (Rayleigh quotient),
    # keeping it only when it does not worsen the residual
    polished = float(left @ b @ right / (left @ right))
    res_p = _residual(b, polished, left, right)
    if res_p <= res:
        lam, res = polished, res_p
    if res > eps_eig:
        raise NoConvergence(it, res)
    right = right / (left @ right)
    return SpectralData(lam * scale, left, right, it, float(res))


def stationary_det(p) -> np.ndarray:
    """Stationary law of a kernel from the principal minors of ``Id - P``.

    ``pi_y`` is proportional to ``det`` of ``Id - P`` with row and column
    ``y`` removed.
    """
    p = np.asarray(p, dtype=float)
    n = p.shape[0]
    if not is_primitive(p):
        raise NotPrimitive("kernel is not primitive")
    a = np.eye(n) - p
    minors = np.empty(n)
    for y in range(n):
        keep = np.r_[0:y, y + 1:n]
        minors[y] = np.linalg.det(a[np.ix_(keep, keep)])
    total = minors.sum()
    if not np.isfinite(total) or abs(total) < np.finfo(float).tiny:
        raise SingularNormalization("all principal minors of Id - P vanish")
    return minors / total
