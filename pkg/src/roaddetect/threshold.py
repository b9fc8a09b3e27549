"""Otsu's histogram threshold."""
from __future__ import annotations

import numpy as np

from .errors import UniformImage
from .raster import as_gray


def bin_indices(values, bins: int = 256):
    """Map values affinely from [min, max] onto bin indices 0..bins-1.

    Returns ``(indices, lo, hi)``. Raises UniformImage when min == max.
    """
    v = as_gray(np.atleast_2d(values))
    lo, hi = float(v.min()), float(v.max())
    if lo == hi:
        raise UniformImage("all values are equal")
    idx = np.floor((v - lo) / (hi - lo) * bins).astype(np.int64)
    return np.clip(idx, 0, bins - 1), lo, hi


def otsu_split(values, bins: int = 256) -> int:
    """Index t of the best split: class 0 holds bins <= t, class 1 bins > t.

    Scores are compared exactly in integer arithmetic, so ties really are
    ties and the lowest maximising t wins.
    """
    if bins < 2:
        raise ValueError("need at least two bins")
    idx, _, _ = bin_indices(values, bins)
    counts = np.bincount(idx.ravel(), minlength=bins)
    n_cum = np.cumsum(counts).tolist()
    s_cum = np.cumsum(counts * np.arange(bins)).tolist()
    n_all, s_all = n_cum[-1], s_cum[-1]

    best_t, best_num, best_den = None, -1, 1
    for t in range(bins - 1):
        n0 = n_cum[t]
        n1 = n_all - n0
        if n0 == 0 or n1 == 0:
            continue
        s0 = s_cum[t]
        # between-class variance times N^2
        num = (s0 * n1 - (s_all - s0) * n0) ** 2
        den = n0 * n1
        if num * best_den > best_num * den:
            best_t, best_num, best_den = t, num, den
    return best_t


def otsu_threshold(values, bins: int = 256) -> float:
    """Bin-centre threshold maximising the between-class variance.

    Pixels belong to the upper class when strictly greater than the result.
    """
    _, lo, hi = bin_indices(values, bins)
    t = otsu_split(values, bins)
    return lo + (t + 0.5) * (hi - lo) / bins


def otsu_mask(values, bins: int = 256) -> np.ndarray:
    """``values > otsu_threshold(values)``; all False for a uniform input."""
    v = as_gray(values)
    try:
        t = otsu_threshold(v, bins)
    except UniformImage:
        return np.zeros(v.shape, dtype=bool)
    return v > t
