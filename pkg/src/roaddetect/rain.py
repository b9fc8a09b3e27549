"""Rain/snow streak synthesis and removal with a re-guided guided filter."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .raster import as_gray, as_rgb, box_mean, check_same_shape, gray, round_half_up, to_unit, unit_to_bytes

# var + eps at or below this counts as a flat window when eps == 0
FLAT_TOL = 1e-12


@dataclass(frozen=True)
class GuidedFilterParams:
    radius: int = 8
    epsilon: float = 0.04

    def __post_init__(self):
        if self.radius < 0:
            raise ValueError("guided filter radius must be >= 0")
        if not self.epsilon >= 0:
            raise ValueError("guided filter epsilon must be >= 0")


@dataclass(frozen=True)
class RainSynthParams:
    """Streak model: a streak pixel is alpha * intensity + (1 - alpha) * background.

    ``angle`` is measured in degrees from vertical. Each streak draws its
    length and angle with the given relative / absolute jitter.
    """

    alpha: float = 0.7
    streak_intensity: float = 255.0
    count: int = 200
    length: float = 24.0
    angle: float = 10.0
    width: int = 1
    length_jitter: float = 0.4
    angle_jitter: float = 4.0
    rng_seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError("alpha must lie in [0, 1]")
        if not 0.0 <= self.streak_intensity <= 255.0:
            raise ValueError("streak_intensity must lie in [0, 255]")
        if self.count < 0 or self.width < 1 or self.length <= 0:
            raise ValueError("streak count must be >= 0, width >= 1 and length > 0")


def streak_mask(shape, params: RainSynthParams) -> np.ndarray:
    """Rasterise ``params.count`` straight streaks into a boolean mask."""
    h, w = shape
    rng = np.random.default_rng(params.rng_seed)
    mask = np.zeros((h, w), dtype=bool)
    for _ in range(params.count):
        cy, cx = rng.uniform(0, h), rng.uniform(0, w)
        length = params.length * (1.0 + rng.uniform(-params.length_jitter, params.length_jitter))
        theta = math.radians(params.angle + rng.uniform(-params.angle_jitter, params.angle_jitter))
        dy, dx = math.cos(theta), math.sin(theta)
        t = np.arange(-length / 2, length / 2 + 0.5, 0.5)
        for k in range(params.width):
            ys = np.floor(cy + t * dy).astype(int)
            xs = np.floor(cx + t * dx + k).astype(int)
            ok = (ys >= 0) & (ys < h) & (xs >= 0) & (xs < w)
            mask[ys[ok], xs[ok]] = True
    return mask


def synthesize_rain(background, params: RainSynthParams):
    """Blend streaks into ``background``; returns ``(rained, streak_mask)``."""
    bg = as_rgb(background)
    mask = streak_mask(bg.shape[:2], params)
    out = bg.copy()
    blended = params.alpha * params.streak_intensity + (1.0 - params.alpha) * bg[mask].astype(np.float64)
    out[mask] = np.clip(round_half_up(blended), 0, 255).astype(np.uint8)
    return out, mask


def guided_filter(p, guide, params: GuidedFilterParams) -> np.ndarray:
    """Edge-preserving smoothing of ``p``, locally affine in ``guide``.

    Window statistics use clipped windows. A flat guide window with
    epsilon == 0 gets slope 0 and intercept mean(p).
    """
    p = as_gray(p)
    guide = as_gray(guide)
    check_same_shape(p, guide, "filter input and guide")
    r, eps = params.radius, params.epsilon

    # centre both planes so the window moments lose less precision
    ic = guide - guide.mean()
    pc = p - p.mean()
    mean_i = box_mean(ic, r)
    mean_p = box_mean(pc, r)
    cov = box_mean(ic * pc, r) - mean_i * mean_p
    var = np.maximum(box_mean(ic * ic, r) - mean_i * mean_i, 0.0)
    den = var + eps
    flat = den <= FLAT_TOL
    a = np.where(flat, 0.0, cov / np.where(flat, 1.0, den))
    b = (mean_p + p.mean()) - a * (mean_i + guide.mean())
    return box_mean(a, r) * guide + box_mean(b, r)


def _filter_channels(planes: np.ndarray, guide: np.ndarray, params: GuidedFilterParams) -> np.ndarray:
    return np.stack([guided_filter(planes[..., c], guide, params) for c in range(planes.shape[2])], axis=2)


def rain_passes(img, params: GuidedFilterParams = GuidedFilterParams()):
    """Both filter passes on unit-interval planes.

    Returns ``(first_pass, refined_guide, second_pass)``. The refined guide
    averages the gray first-pass output with the gray of the input whose
    brightened pixels (input brighter than the first pass) are replaced by
    the first-pass values.
    """
    rgb = as_rgb(img)
    planes = to_unit(rgb)
    guide = gray(rgb)
    first = _filter_channels(planes, guide, params)
    first_gray = first.mean(axis=2)
    brightened = (guide - first_gray) > 0
    restored = np.where(brightened[..., None], first, planes)
    refined = 0.5 * (first_gray + restored.mean(axis=2))
    second = _filter_channels(planes, refined, params)
    return first, refined, second


def remove_rain_snow(img, params: GuidedFilterParams = GuidedFilterParams()) -> np.ndarray:
    """Suppress rain/snow streaks; output is rounded half-up and clamped."""
    return unit_to_bytes(rain_passes(img, params)[2])
