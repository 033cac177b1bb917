"""Linear l1-norm sketch built from Cauchy (1-stable) projections.

``S x`` has i.i.d. Cauchy entries scaled by ``||x||_1`` in every row, and
the median of ``|C(0, 1)|`` is 1, so the median of absolute accumulators
estimates ``||x||_1``. Columns of ``S`` are regenerated on demand from
``(seed, index)`` with a Philox key, never stored per update.

Entries are clipped to ``±2**14`` and rounded to the grid ``2**-24``.
Both changes are far below the estimator's resolution, and they make
every sum of integer-weighted entries exact in float64 as long as the
total update mass stays below ``2**15``. With exact sums, the same
multiset of updates in any order gives bit-identical accumulators, and
sketching ``x`` then subtracting ``S x`` gives exactly zero.
"""

from __future__ import annotations

import math
import struct
from typing import Mapping

import numpy as np

__all__ = [
    "L1Sketch",
    "DEFAULT_C_SKETCH",
    "sketch_rows",
    "sketch_new",
    "sketch_update",
    "sketch_estimate_diff",
]

DEFAULT_C_SKETCH = 8.0

_CLIP = 2.0 ** 14
_QUANTUM = 2.0 ** -24
_HEADER = struct.Struct("<qqddQ")
_MAX_CACHED_ENTRIES = 1 << 26


def sketch_rows(eps: float, delta: float, c_sketch: float = DEFAULT_C_SKETCH,
                log_inv_delta: float | None = None) -> int:
    """``ceil(c_sketch * eps**-2 * ln(1/delta))``."""
    if log_inv_delta is None:
        log_inv_delta = math.log(1.0 / delta)
    return max(1, math.ceil(c_sketch * log_inv_delta / eps ** 2))


def _cauchy_column(seed: int, index: int, d: int) -> np.ndarray:
    key = np.array([seed & 0xFFFFFFFFFFFFFFFF, index], dtype=np.uint64)
    u = np.random.Generator(np.random.Philox(key=key)).random(d)
    c = np.tan(np.pi * (u - 0.5))
    np.clip(c, -_CLIP, _CLIP, out=c)
    return np.rint(c / _QUANTUM) * _QUANTUM


class L1Sketch:
    """``d``-row l1 sketch of a vector in ``R^N``.

    Parameters
    ----------
    N : int
        Ambient dimension.
    eps, delta : float
        Target accuracy and failure probability; ``d`` follows from them.
    seed : int
        Key for column regeneration.
    c_sketch : float
        Constant in the row count.
    rows : int, optional
        Override ``d`` (used when loading a serialized sketch).
    """

    def __init__(self, N: int, eps: float, delta: float, seed: int = 0,
                 c_sketch: float = DEFAULT_C_SKETCH, rows: int | None = None,
                 log_inv_delta: float | None = None):
        if not 0 < eps < 1:
            raise ValueError(f"eps must lie in (0, 1), got {eps}")
        if not 0 < delta < 1:
            raise ValueError(f"delta must lie in (0, 1), got {delta}")
        if N < 1:
            raise ValueError("N must be at least 1")
        if seed < 0:
            raise ValueError("seed must be non-negative")
        self.N = int(N)
        self.eps = float(eps)
        self.delta = float(delta)
        self.seed = int(seed)
        self.c_sketch = float(c_sketch)
        self.d = int(rows) if rows is not None else sketch_rows(
            eps, delta, c_sketch, log_inv_delta)
        self.acc = np.zeros(self.d, dtype=np.float64)
        self._columns: dict[int, np.ndarray] = {}
        self._matrix: np.ndarray | None = None

    def column(self, index: int) -> np.ndarray:
        """Column ``index`` of the implicit ``d x N`` projection."""
        if not 0 <= index < self.N:
            raise IndexError(f"index {index} outside [0, {self.N})")
        if self._matrix is not None:
            return self._matrix[:, index]
        col = self._columns.get(index)
        if col is None:
            col = _cauchy_column(self.seed, index, self.d)
            if (len(self._columns) + 1) * self.d <= _MAX_CACHED_ENTRIES:
                self._columns[index] = col
        return col

    def matrix(self) -> np.ndarray:
        """The full ``d x N`` projection (materialized once, then cached)."""
        if self._matrix is None:
            if self.N * self.d > _MAX_CACHED_ENTRIES:
                raise MemoryError(
                    f"refusing to materialize a {self.d} x {self.N} sketch matrix")
            mat = np.empty((self.d, self.N), dtype=np.float64)
            for j in range(self.N):
                mat[:, j] = self.column(j)
            self._matrix = mat
            self._columns.clear()
        return self._matrix

    def update(self, index: int, delta: int = 1):
        """``acc += delta * column(index)``."""
        if delta:
            self.acc += delta * self.column(index)

    def estimate(self) -> float:
        """Estimate of ``||x||_1`` for the streamed vector ``x``."""
        return _median_abs(self.acc)

    def implicit_product(self, y) -> np.ndarray:
        """``S y`` for ``y`` given as a dense vector or an ``{index: value}`` map."""
        if isinstance(y, Mapping):
            out = np.zeros(self.d)
            for j in sorted(y):
                v = y[j]
                if v:
                    out += v * self.column(j)
            return out
        y = np.asarray(y, dtype=np.float64)
        if y.shape != (self.N,):
            raise ValueError(f"vector has shape {y.shape}, expected ({self.N},)")
        return self.matrix() @ y

    def estimate_diff(self, y) -> float:
        """Estimate ``||x - y||_1`` from ``S x - S y``."""
        return _median_abs(self.acc - self.implicit_product(y))

    def estimate_diff_many(self, Y, batch: int = 256) -> np.ndarray:
        """Row-wise ``estimate_diff`` for a ``(B, N)`` matrix of candidates."""
        Y = np.asarray(Y, dtype=np.float64)
        if Y.ndim != 2 or Y.shape[1] != self.N:
            raise ValueError(f"expected shape (B, {self.N}), got {Y.shape}")
        S = self.matrix()
        out = np.empty(Y.shape[0])
        lo_k, hi_k = (self.d - 1) // 2, self.d // 2
        for s in range(0, Y.shape[0], batch):
            D = np.abs(self.acc[None, :] - Y[s:s + batch] @ S.T)
            if lo_k == hi_k:
                out[s:s + batch] = np.partition(D, lo_k, axis=1)[:, lo_k]
            else:
                P = np.partition(D, [lo_k, hi_k], axis=1)
                out[s:s + batch] = 0.5 * (P[:, lo_k] + P[:, hi_k])
        return out

    def copy(self) -> "L1Sketch":
        other = L1Sketch(self.N, self.eps, self.delta, self.seed, self.c_sketch, rows=self.d)
        other.acc = self.acc.copy()
        return other

    def __add__(self, other: "L1Sketch") -> "L1Sketch":
        if (self.N, self.d, self.seed) != (other.N, other.d, other.seed):
            raise ValueError("can only add sketches with identical N, d and seed")
        out = self.copy()
        out.acc = self.acc + other.acc
        return out

    def to_bytes(self) -> bytes:
        """Header ``(N, d, eps, delta, seed)`` as little-endian 64-bit fields, then accumulators."""
        return _HEADER.pack(self.N, self.d, self.eps, self.delta, self.seed) + \
            self.acc.astype("<f8").tobytes()

    @classmethod
    def from_bytes(cls, blob: bytes) -> "L1Sketch":
        N, d, eps, delta, seed = _HEADER.unpack_from(blob)
        body = blob[_HEADER.size:]
        if len(body) != 8 * d:
            raise ValueError(f"blob holds {len(body)} accumulator bytes, header says {8 * d}")
        s = cls(N, eps, delta, seed, rows=d)
        s.acc = np.frombuffer(body, dtype="<f8").astype(np.float64)
        return s

    def __repr__(self):
        return f"L1Sketch(N={self.N}, d={self.d}, eps={self.eps}, delta={self.delta:.3g}, seed={self.seed})"


def _median_abs(v: np.ndarray) -> float:
    return float(np.median(np.abs(v)))


def sketch_new(N, eps, delta, seed, c_sketch=DEFAULT_C_SKETCH) -> L1Sketch:
    return L1Sketch(N, eps, delta, seed, c_sketch)


def sketch_update(s: L1Sketch, index: int, delta: int):
    s.update(index, delta)


def sketch_estimate_diff(s: L1Sketch, y) -> float:
    return s.estimate_diff(y)
