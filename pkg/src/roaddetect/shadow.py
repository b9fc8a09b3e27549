"""Shadow detection (NDI + Otsu) and buffer-based shadow compensation."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .morphology import connected_components
from .raster import HsvRaster, as_mask, as_rgb, box_sum, check_same_shape, rgb_to_hsv, to_bytes
from .threshold import otsu_mask

DEFAULT_BUFFER_WIDTH = 5


def compute_ndi(hsv: HsvRaster) -> np.ndarray:
    """Normalised difference (S - V) / (S + V); 0 where S + V = 0."""
    s, v = hsv.s, hsv.v
    total = s + v
    out = np.zeros_like(total)
    nz = total > 0
    out[nz] = (s[nz] - v[nz]) / total[nz]
    return np.clip(out, -1.0, 1.0)


def detect_shadow_mask(img) -> np.ndarray:
    """Pixels whose NDI lies strictly above the Otsu threshold of the NDI map."""
    return otsu_mask(compute_ndi(rgb_to_hsv(img)))


@dataclass(frozen=True)
class ShadowRegion:
    label: int
    pixels: np.ndarray  # (n, 2) row/col
    buffer: np.ndarray  # (m, 2) row/col, may be empty
    shadow_mean: np.ndarray
    shadow_std: np.ndarray
    buffer_mean: np.ndarray | None
    buffer_std: np.ndarray | None


def _channel_stats(values: np.ndarray):
    # population statistics, one entry per channel
    return values.mean(axis=0), values.std(axis=0)


def shadow_regions(img, mask, buffer_width: int = DEFAULT_BUFFER_WIDTH) -> list[ShadowRegion]:
    """Split the mask into 8-connected regions and measure each one's buffer ring.

    The buffer of a region is every non-shadow pixel within Chebyshev
    distance ``buffer_width`` of it. If that ring is empty the statistics of
    all non-shadow pixels are used; if there are none, buffer stats are None.
    """
    rgb = as_rgb(img)
    m = as_mask(mask)
    check_same_shape(rgb, m, "image and shadow mask")
    if buffer_width < 1:
        raise ValueError("buffer_width must be >= 1")
    h, w = m.shape
    pixels = rgb.astype(np.float64)
    lab = connected_components(m, 8)
    outside = ~m
    global_stats = _channel_stats(pixels[outside]) if outside.any() else (None, None)

    regions = []
    for k, box in enumerate(ndimage.find_objects(lab.labels), start=1):
        if box is None:
            continue
        y0 = max(box[0].start - buffer_width, 0)
        y1 = min(box[0].stop + buffer_width, h)
        x0 = max(box[1].start - buffer_width, 0)
        x1 = min(box[1].stop + buffer_width, w)
        comp = lab.labels[y0:y1, x0:x1] == k
        near = box_sum(comp, buffer_width) > 0.5
        ring = near & outside[y0:y1, x0:x1]

        cy, cx = np.nonzero(comp)
        by, bx = np.nonzero(ring)
        comp_px = np.column_stack([cy + y0, cx + x0])
        ring_px = np.column_stack([by + y0, bx + x0])
        mu, sd = _channel_stats(pixels[comp_px[:, 0], comp_px[:, 1]])
        if len(ring_px):
            mu_b, sd_b = _channel_stats(pixels[ring_px[:, 0], ring_px[:, 1]])
        else:
            mu_b, sd_b = global_stats
        regions.append(ShadowRegion(k, comp_px, ring_px, mu, sd, mu_b, sd_b))
    return regions


def transfer(values: np.ndarray, mu, sigma, mu_buff, sigma_buff) -> np.ndarray:
    """Mean/deviation transfer of shadow values onto buffer statistics.

    A flat region (sigma == 0) maps every pixel to the buffer mean.
    """
    values = np.asarray(values, dtype=np.float64)
    mu, sigma = np.asarray(mu, dtype=np.float64), np.asarray(sigma, dtype=np.float64)
    mu_buff, sigma_buff = np.asarray(mu_buff, dtype=np.float64), np.asarray(sigma_buff, dtype=np.float64)
    flat = sigma == 0
    scale = np.where(flat, 0.0, sigma_buff / np.where(flat, 1.0, sigma))
    return mu_buff + scale * (values - mu)


def compensate_shadow(img, mask, buffer_width: int = DEFAULT_BUFFER_WIDTH) -> np.ndarray:
    """Re-light each shadow region from the statistics of its buffer ring."""
    rgb = as_rgb(img)
    out = rgb.copy()
    pixels = rgb.astype(np.float64)
    for region in shadow_regions(rgb, mask, buffer_width):
        if region.buffer_mean is None:
            continue
        ys, xs = region.pixels[:, 0], region.pixels[:, 1]
        new = transfer(pixels[ys, xs], region.shadow_mean, region.shadow_std,
                       region.buffer_mean, region.buffer_std)
        out[ys, xs] = to_bytes(new)
    return out


def remove_shadow(img, buffer_width: int = DEFAULT_BUFFER_WIDTH):
    """Detect and compensate shadows; returns ``(image, shadow_mask)``."""
    mask = detect_shadow_mask(img)
    return compensate_shadow(img, mask, buffer_width), mask
