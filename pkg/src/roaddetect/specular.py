"""Highlight detection (dark channel + Otsu) and specular-to-diffuse removal.

Under the dichromatic model a pixel is a diffuse body colour plus an
illuminant-coloured specular term. With a white illuminant the specular term
adds the same amount to every channel, so removing it means subtracting one
scalar per pixel. That scalar is chosen so the pixel's maximum chromaticity
(max channel over channel sum) lands on the diffuse estimate ``lambda_max``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .raster import as_mask, as_rgb, check_same_shape, to_bytes
from .threshold import otsu_mask

ACHROMATIC = 1.0 / 3.0
FALLBACK_LAMBDA_MAX = 0.5


@dataclass(frozen=True)
class SpecularParams:
    patch_radius: int = 3
    achromatic_band: float = 0.02
    percentile: float = 95.0

    def __post_init__(self):
        if self.patch_radius < 0:
            raise ValueError("patch_radius must be >= 0")
        if not 0.0 < self.achromatic_band < ACHROMATIC:
            raise ValueError("achromatic_band must lie in (0, 1/3)")
        if not 0.0 <= self.percentile <= 100.0:
            raise ValueError("percentile must lie in [0, 100]")


def dark_channel(img, patch_radius: int) -> np.ndarray:
    """Minimum channel value over a clipped square patch, scaled to [0, 1]."""
    rgb = as_rgb(img)
    if patch_radius < 0:
        raise ValueError("patch_radius must be >= 0")
    per_pixel = rgb.min(axis=2)
    size = 2 * patch_radius + 1
    # mode="nearest" repeats edge pixels, which cannot change a minimum, so
    # this equals the clipped-window minimum
    patch_min = ndimage.minimum_filter(per_pixel, size=size, mode="nearest")
    return patch_min.astype(np.float64) / 255.0


def detect_highlight_mask(img, params: SpecularParams = SpecularParams()) -> np.ndarray:
    return otsu_mask(dark_channel(img, params.patch_radius))


def max_chromaticity(img) -> np.ndarray:
    """max(I) / sum(I) per pixel; black pixels get 1/3."""
    rgb = np.asarray(img, dtype=np.float64)
    total = rgb.sum(axis=2)
    out = np.full(total.shape, ACHROMATIC)
    nz = total > 0
    out[nz] = rgb.max(axis=2)[nz] / total[nz]
    return out


def estimate_lambda_max(img, mask, params: SpecularParams = SpecularParams()) -> float:
    """Percentile of the max chromaticity of chromatic pixels outside the mask."""
    lam = max_chromaticity(as_rgb(img))
    keep = ~as_mask(mask) & (lam > ACHROMATIC + params.achromatic_band)
    if not keep.any():
        return FALLBACK_LAMBDA_MAX
    return float(np.percentile(lam[keep], params.percentile))


def specular_magnitude(img, lambda_max: float) -> np.ndarray:
    """Scalar specular term per pixel: (max I - L * sum I) / (1 - 3 L)."""
    rgb = np.asarray(img, dtype=np.float64)
    return (rgb.max(axis=-1) - lambda_max * rgb.sum(axis=-1)) / (1.0 - 3.0 * lambda_max)


def remove_specular(img, mask, params: SpecularParams = SpecularParams(),
                    lambda_max: float | None = None) -> np.ndarray:
    """Subtract the specular scalar from every channel of masked pixels.

    Skipped (left unchanged): pixels whose own max chromaticity is within
    ``achromatic_band`` of 1/3, black pixels, and pixels whose computed
    magnitude is negative. ``lambda_max`` defaults to the diffuse estimate
    from unmasked pixels.
    """
    rgb = as_rgb(img)
    m = as_mask(mask)
    check_same_shape(rgb, m, "image and highlight mask")
    if lambda_max is None:
        lambda_max = estimate_lambda_max(rgb, m, params)
    out = rgb.copy()
    if not m.any() or abs(1.0 - 3.0 * lambda_max) < 1e-12:
        return out

    px = rgb[m].astype(np.float64)
    total = px.sum(axis=1)
    lam = max_chromaticity(px[None])[0]
    spec = specular_magnitude(px, lambda_max)
    act = (total > 0) & (lam > ACHROMATIC + params.achromatic_band) & (spec >= 0)
    px[act] -= spec[act, None]
    out[m] = to_bytes(px)
    return out


def suppress_highlights(img, params: SpecularParams = SpecularParams()):
    """Detect and remove highlights; returns ``(image, highlight_mask)``."""
    mask = detect_highlight_mask(img, params)
    return remove_specular(img, mask, params), mask
