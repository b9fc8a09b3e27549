"""Raster containers, color conversion and windowed statistics.

Rasters are plain numpy arrays:

* RGB raster  -- ``uint8`` array of shape ``(height, width, 3)``
* gray raster -- ``float64`` array of shape ``(height, width)``
* binary mask -- ``bool`` array of shape ``(height, width)``

The ``as_*`` helpers validate and normalise inputs; every public operation
returns a fresh array and never mutates its arguments.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch

UNDEFINED_HUE = float("nan")


def as_rgb(img) -> np.ndarray:
    arr = np.asarray(img)
    if arr.ndim != 3 or arr.shape[2] != 3 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError(f"expected an (H, W, 3) RGB raster, got shape {arr.shape}")
    if arr.dtype != np.uint8:
        if np.any(arr < 0) or np.any(arr > 255) or np.any(arr != np.round(arr)):
            raise ValueError("RGB channels must be integers in [0, 255]")
        arr = arr.astype(np.uint8)
    return arr


def as_gray(img) -> np.ndarray:
    arr = np.asarray(img, dtype=np.float64)
    if arr.ndim != 2 or arr.size == 0:
        raise ValueError(f"expected a non-empty (H, W) gray raster, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("gray raster contains NaN or infinite values")
    return arr


def as_mask(mask) -> np.ndarray:
    arr = np.asarray(mask)
    if arr.ndim != 2 or arr.size == 0:
        raise ValueError(f"expected a non-empty (H, W) mask, got shape {arr.shape}")
    if arr.dtype != np.bool_:
        if not np.all((arr == 0) | (arr == 1)):
            raise ValueError("mask values must be 0 or 1")
        arr = arr.astype(bool)
    return arr


def check_same_shape(a: np.ndarray, b: np.ndarray, what: str = "rasters") -> None:
    if a.shape[:2] != b.shape[:2]:
        raise DimensionMismatch(f"{what} differ in size: {a.shape[:2]} vs {b.shape[:2]}")


def to_unit(img: np.ndarray) -> np.ndarray:
    """8-bit channels to unit-interval floats."""
    return np.asarray(img, dtype=np.float64) / 255.0


def round_half_up(x) -> np.ndarray:
    return np.floor(np.asarray(x, dtype=np.float64) + 0.5)


def to_bytes(x: np.ndarray) -> np.ndarray:
    """Round half-up and clamp 8-bit-scale floats back to ``uint8``."""
    return np.clip(round_half_up(x), 0, 255).astype(np.uint8)


def unit_to_bytes(x: np.ndarray) -> np.ndarray:
    return to_bytes(np.clip(x, 0.0, 1.0) * 255.0)


def gray(img) -> np.ndarray:
    """Intensity (R+G+B)/3 on the unit interval; also the HSV value channel."""
    rgb = np.asarray(img, dtype=np.float64)
    return rgb.sum(axis=2) / (3.0 * 255.0)


@dataclass(frozen=True)
class HsvRaster:
    """Per-pixel hue (degrees, NaN when undefined), saturation and value."""

    h: np.ndarray
    s: np.ndarray
    v: np.ndarray

    @property
    def shape(self):
        return self.s.shape

    @property
    def hue_defined(self) -> np.ndarray:
        return ~np.isnan(self.h)


def rgb_to_hsv(img) -> HsvRaster:
    """Intensity-based HSV: V is the channel mean, S is one minus min over mean.

    Black pixels get S = 0. Achromatic pixels (R = G = B) have no hue and carry
    ``UNDEFINED_HUE``. The hue takes theta when B <= G and 360 - theta otherwise.
    """
    rgb = as_rgb(img).astype(np.float64)
    r, g, b = rgb[..., 0], rgb[..., 1], rgb[..., 2]
    total = r + g + b
    v = total / (3.0 * 255.0)

    s = np.zeros_like(total)
    nz = total > 0
    s[nz] = 1.0 - 3.0 * rgb.min(axis=2)[nz] / total[nz]
    # exact zero for achromatic pixels, whatever the float path produced
    achromatic = (r == g) & (g == b)
    s[achromatic] = 0.0
    s = np.clip(s, 0.0, 1.0)

    num = 0.5 * ((r - g) + (r - b))
    den = np.sqrt((r - g) ** 2 + (r - b) * (g - b))
    h = np.full_like(total, UNDEFINED_HUE)
    ok = ~achromatic
    theta = np.degrees(np.arccos(np.clip(num[ok] / den[ok], -1.0, 1.0)))
    h[ok] = np.where(b[ok] <= g[ok], theta, 360.0 - theta)
    h[ok] = np.mod(h[ok], 360.0)
    return HsvRaster(h=h, s=s, v=v)


def _window_bounds(n: int, radius: int):
    idx = np.arange(n)
    lo = np.clip(idx - radius, 0, n)
    hi = np.clip(idx + radius + 1, 0, n)
    return lo, hi


def box_sum(src, radius: int) -> np.ndarray:
    """Sum over the (2r+1)^2 window clipped to the image border."""
    if radius < 0:
        raise ValueError("radius must be >= 0")
    a = np.asarray(src, dtype=np.float64)
    h, w = a.shape
    integral = np.zeros((h + 1, w + 1))
    integral[1:, 1:] = a.cumsum(axis=0).cumsum(axis=1)
    y0, y1 = _window_bounds(h, radius)
    x0, x1 = _window_bounds(w, radius)
    return (
        integral[np.ix_(y1, x1)]
        - integral[np.ix_(y0, x1)]
        - integral[np.ix_(y1, x0)]
        + integral[np.ix_(y0, x0)]
    )


def box_count(shape, radius: int) -> np.ndarray:
    """Number of in-bounds pixels in each clipped window."""
    h, w = shape
    y0, y1 = _window_bounds(h, radius)
    x0, x1 = _window_bounds(w, radius)
    return np.outer(y1 - y0, x1 - x0).astype(np.float64)


def box_mean(src, radius: int) -> np.ndarray:
    """Mean over clipped (2r+1)^2 windows, dividing by the in-bounds count.

    The plane is centred before integration so that large offsets do not
    cost precision in the running sums.
    """
    a = as_gray(src)
    if radius < 0:
        raise ValueError("radius must be >= 0")
    if radius == 0:
        return a.copy()
    offset = a.mean()
    out = box_sum(a - offset, radius) / box_count(a.shape, radius) + offset
    # keep the output inside the input range despite rounding in the sums
    return np.clip(out, a.min(), a.max())
