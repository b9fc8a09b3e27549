"""Procedural road scenes with exact ground truth, plus degradations.

A scene is a forward-facing view: sky above the horizon, tree canopy in the
top corners, grass verges and a road narrowing towards a vanishing point.
Every generator is a pure function of its seed.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .rain import RainSynthParams, synthesize_rain
from .raster import as_rgb, box_mean, round_half_up

KINDS = ("shadow", "rain", "specular")
RAIN_ALPHAS = (0.4, 0.7, 1.0)
PENUMBRA = 8
FOLIAGE_BLUR = 8
SENSOR_NOISE = 1.0


@dataclass(frozen=True)
class Scene:
    image: np.ndarray  # clean RGB
    road: np.ndarray  # ground-truth road mask


@dataclass(frozen=True)
class Frame:
    name: str
    kind: str
    degraded: np.ndarray
    clean: np.ndarray
    road: np.ndarray
    noise: np.ndarray  # where the degradation was applied


def _smooth_noise(rng, shape, scale):
    """Low-frequency noise in [-1, 1] from a bilinearly upsampled grid."""
    h, w = shape
    gh, gw = max(2, h // scale + 2), max(2, w // scale + 2)
    grid = rng.uniform(-1, 1, (gh, gw))
    ys = np.linspace(0, gh - 1.001, h)
    xs = np.linspace(0, gw - 1.001, w)
    y0, x0 = ys.astype(int), xs.astype(int)
    fy, fx = (ys - y0)[:, None], (xs - x0)[None, :]
    g00 = grid[np.ix_(y0, x0)]
    g01 = grid[np.ix_(y0, x0 + 1)]
    g10 = grid[np.ix_(y0 + 1, x0)]
    g11 = grid[np.ix_(y0 + 1, x0 + 1)]
    return (g00 * (1 - fy) * (1 - fx) + g01 * (1 - fy) * fx + g10 * fy * (1 - fx) + g11 * fy * fx)


def _blobs(rng, shape, centres_x, centres_y, radii):
    h, w = shape
    yy, xx = np.mgrid[0:h, 0:w]
    out = np.zeros(shape, dtype=bool)
    for cx, cy, r in zip(centres_x, centres_y, radii):
        out |= (xx - cx) ** 2 + (yy - cy) ** 2 <= r * r
    return out


def _shade(img, mask, rng, penumbra: int = 0):
    # skylight keeps blue, direct sun (mostly red/green) is blocked
    gain = np.array([0.18, 0.26, 0.55]) * rng.uniform(0.9, 1.1)
    if penumbra:
        weight = box_mean(mask.astype(np.float64), penumbra)[..., None]
        img *= 1.0 - weight * (1.0 - gain)
    else:
        img[mask] *= gain


def make_scene(seed: int, width: int = 512, height: int = 384) -> Scene:
    """Sunny road scene; roadside trees cast soft shadows onto the verges.

    Foliage is out of focus and tree shadows have penumbrae, so most edges
    are soft.
    """
    rng = np.random.default_rng(seed)
    h, w = height, width
    yy, xx = np.mgrid[0:h, 0:w].astype(np.float64)
    horizon = h * rng.uniform(0.26, 0.32)

    # road: trapezoid from the bottom edge to a vanishing point near the horizon
    vx = w * rng.uniform(0.42, 0.58)
    top_half = w * rng.uniform(0.025, 0.045)
    bottom_l = w * rng.uniform(0.04, 0.14)
    bottom_r = w * rng.uniform(0.86, 0.96)
    t = np.clip((yy - horizon) / (h - 1 - horizon), 0, 1)
    left = (vx - top_half) + t * (bottom_l - (vx - top_half))
    right = (vx + top_half) + t * (bottom_r - (vx + top_half))
    road = (yy >= horizon) & (xx >= left) & (xx <= right)
    ground = yy >= horizon

    img = np.zeros((h, w, 3))
    sky_top = np.array([150, 180, 225]) + rng.uniform(-8, 8, 3)
    sky_low = np.array([185, 205, 235]) + rng.uniform(-8, 8, 3)
    f = np.clip(yy / max(horizon, 1), 0, 1)[..., None]
    img[:] = sky_top * (1 - f) + sky_low * f

    tex = _smooth_noise(rng, (h, w), 24)[..., None]
    grass = np.array([105, 115, 82]) + rng.uniform(-6, 6, 3)
    img[ground] = grass + 8 * tex[ground]

    asphalt = np.array([140, 118, 92]) + rng.uniform(-6, 6, 3)
    rtex = _smooth_noise(rng, (h, w), 40)[..., None]
    img[road] = asphalt + 8 * rtex[road]

    # shadows of roadside trees on the verges, kept off the road
    verge = ground & ~road
    margin = PENUMBRA + 3
    near_road = np.abs(xx - np.clip(xx, left - margin, right + margin)) < 1e-9
    free = verge & ~near_road
    target = rng.uniform(0.25, 0.35) * free.sum()
    shade = np.zeros((h, w), dtype=bool)
    pick_y, pick_x = np.nonzero(free)
    for _ in range(200):
        if (shade & free).sum() >= target:
            break
        j = rng.integers(len(pick_y))
        cy, cx = pick_y[j], pick_x[j]
        ry, rx = rng.uniform(0.02, 0.06) * h, rng.uniform(0.04, 0.12) * w
        shade |= ((xx - cx) / rx) ** 2 + ((yy - cy) / ry) ** 2 <= 1
    _shade(img, shade & free, rng, PENUMBRA)

    # out-of-focus foliage in the top corners
    n = 7
    leaf = np.array([100, 115, 78]) + rng.uniform(-6, 6, 3)
    for side in (0, 1):
        cx = rng.uniform(0, 0.3, n) * w
        if side:
            cx = w - cx
        cy = rng.uniform(-0.05, 0.2, n) * h
        r = rng.uniform(0.06, 0.12, n) * w
        canopy = _blobs(rng, (h, w), cx, cy, r) & ~road
        cover = box_mean(canopy.astype(np.float64), FOLIAGE_BLUR)[..., None]
        img = img * (1 - cover) + (leaf + 10 * tex) * cover

    img += rng.normal(0, SENSOR_NOISE, img.shape)
    return Scene(np.clip(round_half_up(img), 0, 255).astype(np.uint8), road)


def add_shadows(img, seed: int, count: int | None = None):
    """Cast dark, bluish tree shadows across the scene; returns ``(image, mask)``."""
    rgb = as_rgb(img)
    rng = np.random.default_rng(seed)
    h, w, _ = rgb.shape
    yy, xx = np.mgrid[0:h, 0:w].astype(np.float64)
    mask = np.zeros((h, w), dtype=bool)
    count = int(rng.integers(2, 5)) if count is None else count
    for _ in range(count):
        # elongated band crossing the lower half of the frame
        cy = rng.uniform(0.5, 0.95) * h
        cx = rng.uniform(0.2, 0.8) * w
        half_len = rng.uniform(0.25, 0.45) * w
        half_thick = rng.uniform(0.03, 0.07) * h
        angle = np.radians(rng.uniform(-20, 20))
        u = (xx - cx) * np.cos(angle) + (yy - cy) * np.sin(angle)
        v = -(xx - cx) * np.sin(angle) + (yy - cy) * np.cos(angle)
        wobble = 0.25 * half_thick * np.sin(u / rng.uniform(8, 16))
        mask |= (np.abs(u) <= half_len) & (np.abs(v + wobble) <= half_thick)
    out = rgb.astype(np.float64)
    _shade(out, mask, rng)
    return np.clip(round_half_up(out), 0, 255).astype(np.uint8), mask


def add_rain(img, seed: int, alpha: float = 0.7, count: int = 250):
    params = RainSynthParams(alpha=alpha, count=count, length=26.0, width=2, rng_seed=seed)
    return synthesize_rain(img, params)


def add_glare(img, seed: int, count: int | None = None):
    """Add white specular lobes (dichromatic model with a white illuminant)."""
    rgb = as_rgb(img)
    rng = np.random.default_rng(seed)
    h, w, _ = rgb.shape
    yy, xx = np.mgrid[0:h, 0:w].astype(np.float64)
    weight = np.zeros((h, w))
    count = int(rng.integers(3, 6)) if count is None else count
    for _ in range(count):
        cy = rng.uniform(0.5, 0.95) * h
        cx = rng.uniform(0.15, 0.85) * w
        ry, rx = rng.uniform(0.04, 0.09) * h, rng.uniform(0.06, 0.14) * w
        d2 = ((yy - cy) / ry) ** 2 + ((xx - cx) / rx) ** 2
        weight = np.maximum(weight, rng.uniform(0.7, 1.0) * np.clip(1.3 - 0.5 * d2, 0, 1))
    weight = np.clip(weight, 0, 1)
    out = rgb.astype(np.float64) + weight[..., None] * 110.0
    return np.clip(round_half_up(out), 0, 255).astype(np.uint8), weight > 0.05


def make_frame(kind: str, index: int, seed: int = 0, width: int = 512, height: int = 384) -> Frame:
    if kind not in KINDS:
        raise ValueError(f"unknown degradation {kind!r}; expected one of {KINDS}")
    base = 1000 * (KINDS.index(kind) + 1) + 97 * seed + index
    scene = make_scene(base, width, height)
    if kind == "shadow":
        degraded, noise = add_shadows(scene.image, base + 1)
    elif kind == "rain":
        degraded, noise = add_rain(scene.image, base + 1, RAIN_ALPHAS[index % len(RAIN_ALPHAS)])
    else:
        degraded, noise = add_glare(scene.image, base + 1)
    return Frame(f"{kind}_{index:03d}", kind, degraded, scene.image, scene.road, noise)


def make_corpus(kinds=KINDS, per_kind: int = 10, seed: int = 0, width: int = 512, height: int = 384):
    return [make_frame(k, i, seed, width, height) for k in kinds for i in range(per_kind)]
