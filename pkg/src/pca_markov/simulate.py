"""Monte Carlo space-time diagrams on a cylinder.

Cell ``i`` of row ``t`` uses the ``i``-th uniform of a Philox stream keyed
by ``seed`` with counter block ``t``. Any split of a row into chunks
therefore draws the same numbers, so results do not depend on threads.
"""

from __future__ import annotations

import os
import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import norm

from .core import TransitionMatrix, WindowTooLarge, check_prob

__all__ = [
    "SpaceTimeDiagram",
    "PatternStats",
    "simulate",
    "pattern_stats",
    "thread_count",
    "BATCH",
]

BATCH = 50
_HEADER = struct.Struct("<IIIQ")
_CHUNK_ALIGN = 4  # Philox emits 4 words per counter step


def thread_count(threads: int | None = None) -> int:
    """Requested thread count, capped by ``PCA_MARKOV_THREADS`` when set."""
    cap = os.environ.get("PCA_MARKOV_THREADS")
    n = 1 if threads is None else int(threads)
    if cap:
        n = min(n, int(cap)) if threads is not None else int(cap)
    return max(1, n)


def _uniforms(seed: int, t: int, start: int, stop: int) -> np.ndarray:
    bg = np.random.Philox(key=seed & 0xFFFFFFFFFFFFFFFF, counter=[0, 0, t, 0])
    if start:
        bg.advance(start // _CHUNK_ALIGN)
    return np.random.Generator(bg).random(stop - start)


@dataclass(frozen=True)
class SpaceTimeDiagram:
    width: int
    steps: int
    kappa: int
    seed: int
    rows: np.ndarray = field(repr=False)  # (steps + 1, width) uint8

    def to_text(self) -> str:
        return "".join(" ".join(map(str, r)) + "\n" for r in self.rows.tolist())

    def to_bytes(self) -> bytes:
        head = _HEADER.pack(self.width, self.steps, self.kappa, self.seed & 0xFFFFFFFFFFFFFFFF)
        return head + np.ascontiguousarray(self.rows, dtype=np.uint8).tobytes()

    @classmethod
    def from_bytes(cls, data: bytes) -> "SpaceTimeDiagram":
        width, steps, kappa, seed = _HEADER.unpack_from(data)
        body = np.frombuffer(data, dtype=np.uint8, offset=_HEADER.size)
        rows = body.reshape(steps + 1, width).copy()
        rows.setflags(write=False)
        return cls(width, steps, kappa, seed, rows)

    @staticmethod
    def rows_from_text(text: str) -> np.ndarray:
        return np.array([[int(v) for v in line.split()] for line in text.splitlines() if line.strip()], dtype=np.uint8)

    def save(self, path, fmt: str = "binary") -> None:
        if fmt == "binary":
            with open(path, "wb") as fh:
                fh.write(self.to_bytes())
        elif fmt == "text":
            with open(path, "w") as fh:
                fh.write(self.to_text())
        else:
            raise ValueError(f"unknown diagram format {fmt!r}")


def _initial_row(init, size: int, width: int, seed: int) -> np.ndarray:
    arr = np.asarray(init)
    if arr.shape == (width,) and np.issubdtype(arr.dtype, np.integer):
        if arr.min() < 0 or arr.max() >= size:
            raise ValueError("initial row has values outside the alphabet")
        return arr.astype(np.uint8)
    p = check_prob(arr, size=size)
    u = _uniforms(seed, 0, 0, width)
    cdf = np.cumsum(p)[:-1]
    return (u[:, None] >= cdf[None, :]).sum(axis=1).astype(np.uint8)


def _update(cdf, row, u, start, stop):
    a = row[start:stop]
    b = np.take(row, np.arange(start + 1, stop + 1), mode="wrap")
    c = cdf[a, b]  # (m, K-1)
    return (u[:, None] >= c).sum(axis=1).astype(np.uint8)


def simulate(
    tm: TransitionMatrix,
    width: int,
    steps: int,
    seed: int,
    init=None,
    threads: int | None = None,
) -> SpaceTimeDiagram:
    """Run the automaton for ``steps`` synchronous updates on ``width`` cells.

    ``init`` is either an explicit integer row or a probability vector for
    i.i.d. initial cells (uniform by default).
    """
    if width < 2:
        raise ValueError("width must be >= 2")
    if steps < 0:
        raise ValueError("steps must be >= 0")
    size = tm.size
    if size > 256:
        raise ValueError("states must fit in one byte")
    if init is None:
        init = np.full(size, 1.0 / size)
    rows = np.empty((steps + 1, width), dtype=np.uint8)
    rows[0] = _initial_row(init, size, width, seed)
    cdf = np.cumsum(tm.t, axis=2)[:, :, :-1]
    nthreads = min(thread_count(threads), max(1, width // _CHUNK_ALIGN))
    if nthreads == 1:
        for t in range(1, steps + 1):
            u = _uniforms(seed, t, 0, width)
            rows[t] = _update(cdf, rows[t - 1], u, 0, width)
    else:
        per = -(-width // nthreads)
        per = -(-per // _CHUNK_ALIGN) * _CHUNK_ALIGN
        bounds = [(s, min(s + per, width)) for s in range(0, width, per)]

        def work(t, s, e):
            rows[t, s:e] = _update(cdf, rows[t - 1], _uniforms(seed, t, s, e), s, e)

        with ThreadPoolExecutor(max_workers=nthreads) as pool:
            for t in range(1, steps + 1):
                list(pool.map(lambda se: work(t, *se), bounds))
    rows.setflags(write=False)
    return SpaceTimeDiagram(width, steps, tm.kappa, int(seed), rows)


@dataclass(frozen=True)
class PatternStats:
    """Cyclic window counts over the rows after burn-in.

    Pattern ``(x_0, ..., x_{k-1})`` has index ``sum_j x_j K**(k-1-j)``
    (lexicographic). ``se`` holds batch-means standard errors of ``freq``.
    """

    window: int
    kappa: int
    burn_in: int
    rows_used: int
    width: int
    counts: np.ndarray
    freq: np.ndarray
    se: np.ndarray

    def pattern(self, index: int) -> tuple:
        k = self.kappa + 1
        return tuple(int(index // k ** (self.window - 1 - j) % k) for j in range(self.window))

    def z_scores(self, expected) -> np.ndarray:
        expected = np.asarray(expected, dtype=float).reshape(-1)
        gap = np.abs(self.freq - expected)
        with np.errstate(divide="ignore", invalid="ignore"):
            z = np.where(self.se > 0, gap / self.se, np.where(gap > 0, np.inf, 0.0))
        return z

    def agrees(self, expected, z: float = 4.0, bonferroni: bool = False) -> bool:
        """Every pattern within ``z`` standard errors of ``expected``.

        With ``bonferroni`` the two-sided level of ``z`` is split across
        the patterns, raising the per-pattern threshold.
        """
        m = self.freq.size
        thr = z
        if bonferroni and m > 1:
            thr = float(norm.isf(norm.sf(z) / m))
        return bool(np.all(self.z_scores(expected) <= thr))


def pattern_stats(diagram: SpaceTimeDiagram, k: int, burn_in: int | None = None, batch: int = BATCH) -> PatternStats:
    if burn_in is None:
        burn_in = diagram.steps // 2
    if not 0 <= burn_in < diagram.steps:
        raise ValueError("burn_in must satisfy 0 <= burn_in < steps")
    if k < 1 or k > diagram.width:
        raise WindowTooLarge(f"window {k} does not fit on width {diagram.width}")
    size = diagram.kappa + 1
    rows = diagram.rows[burn_in + 1 :].astype(np.int64)
    codes = np.zeros_like(rows)
    for j in range(k):
        codes = codes * size + np.roll(rows, -j, axis=1)
    npat = size**k
    offs = np.arange(rows.shape[0])[:, None] * npat
    per_row = np.bincount((codes + offs).ravel(), minlength=rows.shape[0] * npat).reshape(rows.shape[0], npat)
    counts = per_row.sum(axis=0)
    nrows = rows.shape[0]
    freq = counts / (nrows * diagram.width)
    row_freq = per_row / diagram.width
    nb = nrows // batch
    if nb >= 2:
        means = row_freq[: nb * batch].reshape(nb, batch, npat).mean(axis=1)
        se = means.std(axis=0, ddof=1) / np.sqrt(nb)
    elif nrows >= 2:
        se = row_freq.std(axis=0, ddof=1) / np.sqrt(nrows)
    else:
        se = np.zeros(npat)
    return PatternStats(k, diagram.kappa, burn_in, nrows, diagram.width, counts, freq, se)
