"""Static range-maximum queries with a sparse table.

Built once over a float array (minus infinity allowed), then any
inclusive index window can be reduced to its maximum in constant time
from two precomputed overlapping blocks. Ties resolve to the smallest
index, both inside the precomputed blocks and between the two query
blocks, which the dynamic program relies on for deterministic
backpointers.
"""

from __future__ import annotations

import numpy as np

from .errors import InputError

__all__ = ["RangeMaxIndex"]


class RangeMaxIndex:
    """Range-maximum index over a fixed 1-D float64 array.

    Windows are inclusive on both ends. ``query_many`` takes whole arrays
    of windows; entries with ``lo > hi`` are treated as empty and come
    back as (-inf, -1) rather than raising, since the solver meets empty
    windows routinely.
    """

    __slots__ = ("values", "_idx", "_n")

    def __init__(self, values: np.ndarray):
        v = np.ascontiguousarray(values, dtype=np.float64)
        if v.ndim != 1 or v.size == 0:
            raise InputError("need a non-empty 1-D array")
        n = v.size
        levels = max(1, int(n).bit_length())
        idx = np.empty((levels, n), dtype=np.int32)
        idx[0] = np.arange(n, dtype=np.int32)
        for lvl in range(1, levels):
            half = 1 << (lvl - 1)
            span = 1 << lvl
            m = n - span + 1
            if m <= 0:
                idx[lvl] = idx[lvl - 1]
                continue
            left = idx[lvl - 1, :m]
            right = idx[lvl - 1, half:half + m]
            # strict comparison: on ties the left block keeps the smaller index
            take_right = v[right] > v[left]
            idx[lvl, :m] = np.where(take_right, right, left)
            idx[lvl, m:] = idx[lvl - 1, m:]
        self.values = v
        self._idx = idx
        self._n = n

    def query_max(self, lo: int, hi: int) -> tuple[float, int]:
        """Maximum value and its smallest index on [lo, hi], inclusive."""
        if lo > hi:
            raise InputError(f"empty window [{lo}, {hi}]")
        if lo < 0 or hi >= self._n:
            raise InputError(f"window [{lo}, {hi}] outside [0, {self._n - 1}]")
        span = hi - lo + 1
        lvl = span.bit_length() - 1
        a = self._idx[lvl, lo]
        b = self._idx[lvl, hi - (1 << lvl) + 1]
        va = self.values[a]
        vb = self.values[b]
        if vb > va:
            return float(vb), int(b)
        return float(va), int(a)

    def query_many(self, lo: np.ndarray, hi: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Vectorized :meth:`query_max` over arrays of inclusive windows.

        Empty windows (lo > hi) yield -inf with index -1. Bounds are
        assumed valid for non-empty windows.
        """
        lo = np.asarray(lo, dtype=np.int64)
        hi = np.asarray(hi, dtype=np.int64)
        valid = lo <= hi
        span = np.where(valid, hi - lo + 1, 1)
        lvl = np.floor(np.log2(span)).astype(np.int64)
        safe_lo = np.where(valid, lo, 0)
        safe_hi = np.where(valid, hi - (1 << lvl) + 1, 0)
        a = self._idx[lvl, safe_lo]
        b = self._idx[lvl, safe_hi]
        va = self.values[a]
        vb = self.values[b]
        take_b = vb > va
        best_val = np.where(take_b, vb, va)
        best_idx = np.where(take_b, b, a)
        best_val = np.where(valid, best_val, -np.inf)
        best_idx = np.where(valid, best_idx, -1).astype(np.int32)
        return best_val, best_idx
