"""Linear soft-margin SVM trained with SMO, plus seed-region sampling."""
from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import NonConvergenceWarning, RegionTooSmall, SingleClass
from .raster import as_rgb

log = logging.getLogger(__name__)

DEFAULT_C = 10.0
DEFAULT_TOL = 1e-3
MAX_SWEEPS = 10_000
_MIN_ETA = 1e-12
MODEL_HEADER = "svm-linear v1"


# --------------------------------------------------------------------------
# training data
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class TrainingSet:
    samples: np.ndarray  # (n, d)
    labels: np.ndarray  # (n,), values -1 / +1

    def __post_init__(self):
        if len(self.samples) != len(self.labels):
            raise ValueError("samples and labels differ in length")


def _ordered_polygon(points):
    pts = np.asarray(points, dtype=np.float64)
    centre = pts.mean(axis=0)
    order = np.argsort(np.arctan2(pts[:, 1] - centre[1], pts[:, 0] - centre[0]))
    return pts[order]


def _in_convex_polygon(px, py, poly):
    """Vectorised point-in-convex-polygon test (boundary counts as inside)."""
    inside = np.ones(np.shape(px), dtype=bool)
    sign = None
    n = len(poly)
    for k in range(n):
        x0, y0 = poly[k]
        x1, y1 = poly[(k + 1) % n]
        cross = (x1 - x0) * (py - y0) - (y1 - y0) * (px - x0)
        if sign is None:
            # orientation of the polygon from its own vertices
            area = sum(poly[i][0] * poly[(i + 1) % n][1] - poly[(i + 1) % n][0] * poly[i][1]
                       for i in range(n))
            sign = 1.0 if area > 0 else -1.0
        inside &= sign * cross >= -1e-12
    return inside


@dataclass(frozen=True)
class SeedLayout:
    """Fractional (x, y) seed regions; y grows downwards.

    ``road`` is a convex polygon, ``non_road`` a tuple of axis-aligned
    rectangles ``(x0, y0, x1, y1)``.
    """

    road: tuple = ((0.35, 1.0), (0.65, 1.0), (0.45, 0.7), (0.55, 0.7))
    non_road: tuple = ((0.0, 0.0, 1.0 / 3.0, 0.15), (2.0 / 3.0, 0.0, 1.0, 0.15))
    samples_per_class: int = 500
    rng_seed: int = 0

    def __post_init__(self):
        coords = [c for p in self.road for c in p] + [c for r in self.non_road for c in r]
        if any(not 0.0 <= c <= 1.0 for c in coords):
            raise ValueError("seed regions must lie within the unit square")
        if len(self.road) < 3 or not self.non_road:
            raise ValueError("need a road polygon and at least one non-road rectangle")
        if self.samples_per_class < 1:
            raise ValueError("samples_per_class must be >= 1")
        for x0, y0, x1, y1 in self.non_road:
            if x1 <= x0 or y1 <= y0:
                raise ValueError("non-road rectangles need x0 < x1 and y0 < y1")
        # disjointness, checked on a fine grid of sample points
        g = (np.arange(400) + 0.5) / 400
        gx, gy = np.meshgrid(g, g)
        road = _in_convex_polygon(gx, gy, _ordered_polygon(self.road))
        if (road & self._rects(gx, gy)).any():
            raise ValueError("road and non-road seed regions overlap")

    def _rects(self, px, py):
        out = np.zeros(np.shape(px), dtype=bool)
        for x0, y0, x1, y1 in self.non_road:
            out |= (px >= x0) & (px < x1) & (py >= y0) & (py < y1)
        return out

    def region_masks(self, height: int, width: int):
        """Pixel masks ``(road, non_road)``, testing pixel centres."""
        px = (np.arange(width) + 0.5) / width
        py = (np.arange(height) + 0.5) / height
        gx, gy = np.meshgrid(px, py)
        road = _in_convex_polygon(gx, gy, _ordered_polygon(self.road))
        return road, self._rects(gx, gy) & ~road


def features(img) -> np.ndarray:
    """Per-pixel (r, g, b) / 255 feature rows, raster order."""
    return as_rgb(img).reshape(-1, 3).astype(np.float64) / 255.0


def sample_seeds(img, layout: SeedLayout = SeedLayout()) -> TrainingSet:
    """Draw ``samples_per_class`` road (+1) and non-road (-1) pixels."""
    rgb = as_rgb(img)
    h, w, _ = rgb.shape
    road, other = layout.region_masks(h, w)
    n = layout.samples_per_class
    rng = np.random.default_rng(layout.rng_seed)
    feats = features(rgb)
    picks = []
    for name, region in (("road", road), ("non-road", other)):
        idx = np.flatnonzero(region.ravel())
        if len(idx) < n:
            raise RegionTooSmall(f"{name} seed region has {len(idx)} pixels, need {n}")
        picks.append(np.sort(rng.choice(idx, size=n, replace=False)))
    samples = np.concatenate([feats[picks[0]], feats[picks[1]]])
    labels = np.concatenate([np.ones(n), -np.ones(n)])
    return TrainingSet(samples, labels)


# --------------------------------------------------------------------------
# model
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class SvmModel:
    support_vectors: np.ndarray  # (k, d)
    multipliers: np.ndarray  # (k,), 0 < lambda <= C
    labels: np.ndarray  # (k,)
    bias: float
    C: float = DEFAULT_C
    tol: float = DEFAULT_TOL
    converged: bool = True
    iterations: int = 0
    weights: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        w = (self.multipliers * self.labels) @ self.support_vectors if len(self.labels) else None
        object.__setattr__(self, "weights", w)

    def decision_function(self, x) -> np.ndarray:
        """sum_i y_i lambda_i (x . x_i) + b for each row of ``x``."""
        x = np.atleast_2d(np.asarray(x, dtype=np.float64))
        if self.weights is None:
            return np.full(len(x), self.bias)
        return x @ self.weights + self.bias

    def predict(self, x) -> np.ndarray:
        """+1 / -1 per row; a zero decision value counts as +1."""
        return np.where(self.decision_function(x) >= 0, 1, -1)


def dual_objective(multipliers, labels, samples) -> float:
    """sum(lambda) - 1/2 ||sum_i lambda_i y_i x_i||^2 for a linear kernel."""
    lam = np.asarray(multipliers, dtype=np.float64)
    w = (lam * np.asarray(labels)) @ np.asarray(samples, dtype=np.float64)
    return float(lam.sum() - 0.5 * w @ w)


def train_svm(data: TrainingSet, C: float = DEFAULT_C, tol: float = DEFAULT_TOL,
              max_sweeps: int = MAX_SWEEPS, full_output: bool = False):
    """Solve the soft-margin dual by sequential minimal optimisation.

    Each step picks the maximal KKT-violating pair and solves the two-variable
    sub-problem in closed form, keeping sum(lambda * y) = 0 and 0 <= lambda <= C.
    Training stops once the violation gap is at most ``tol``. The iteration
    cap is ``max_sweeps * n`` pair updates; hitting it emits
    ``NonConvergenceWarning`` and returns the last iterate with
    ``converged=False``.

    With ``full_output`` the full multiplier vector is returned alongside
    the model.
    """
    x = np.asarray(data.samples, dtype=np.float64)
    y = np.asarray(data.labels, dtype=np.float64)
    if x.ndim != 2 or len(x) != len(y):
        raise ValueError("samples must be (n, d) with one label per row")
    if not set(np.unique(y)) <= {-1.0, 1.0}:
        raise ValueError("labels must be -1 or +1")
    if not ((y > 0).any() and (y < 0).any()):
        raise SingleClass("training set holds a single class")
    if not C > 0:
        raise ValueError("C must be > 0")

    n = len(y)
    sq = np.einsum("ij,ij->i", x, x)
    lam = np.zeros(n)
    w = np.zeros(x.shape[1])
    pos = y > 0
    cap = max_sweeps * n
    converged = False
    it = 0
    while True:
        score = y - x @ w  # -y_i * gradient_i
        at_zero = lam <= 0.0
        at_c = lam >= C
        up = np.where(pos, ~at_c, ~at_zero)
        low = np.where(pos, ~at_zero, ~at_c)
        i = int(np.argmax(np.where(up, score, -np.inf)))
        j = int(np.argmin(np.where(low, score, np.inf)))
        gap = score[i] - score[j]
        if gap <= tol:
            converged = True
            break
        if it >= cap:
            break
        it += 1

        eta = max(sq[i] + sq[j] - 2.0 * (x[i] @ x[j]), _MIN_ETA)
        t = gap / eta
        # lambda_i moves by +y_i t, lambda_j by -y_j t
        room_i = C - lam[i] if y[i] > 0 else lam[i]
        room_j = lam[j] if y[j] > 0 else C - lam[j]
        t = min(t, room_i, room_j)
        new_i = lam[i] + y[i] * t
        new_j = lam[j] - y[j] * t
        if t == room_i:
            new_i = C if y[i] > 0 else 0.0
        if t == room_j:
            new_j = 0.0 if y[j] > 0 else C
        w += y[i] * (new_i - lam[i]) * x[i] + y[j] * (new_j - lam[j]) * x[j]
        lam[i], lam[j] = new_i, new_j

    if not converged:
        warnings.warn(f"SMO stopped after {it} updates with gap {gap:.3g} > tol {tol}",
                      NonConvergenceWarning, stacklevel=2)

    w = (lam * y) @ x
    score = y - x @ w
    free = (lam > 0) & (lam < C)
    if free.any():
        b = float(score[free].mean())
    else:
        up = np.where(pos, lam < C, lam > 0)
        low = np.where(pos, lam > 0, lam < C)
        hi = score[up].max() if up.any() else score[low].min()
        lo = score[low].min() if low.any() else hi
        b = 0.5 * float(hi + lo)
    sv = lam > 0
    log.debug("SMO: %d updates, %d support vectors, b=%.6g", it, int(sv.sum()), b)
    model = SvmModel(x[sv].copy(), lam[sv].copy(), y[sv].copy(), b, float(C), float(tol),
                     converged, it)
    return (model, lam) if full_output else model


def classify(model: SvmModel, img) -> np.ndarray:
    """Road mask: True where the decision value is >= 0."""
    rgb = as_rgb(img)
    return (model.decision_function(features(rgb)) >= 0).reshape(rgb.shape[:2])


# --------------------------------------------------------------------------
# serialisation
# --------------------------------------------------------------------------

def _g(v: float) -> str:
    return "%.17g" % v


def dumps_model(model: SvmModel) -> str:
    lines = [MODEL_HEADER, f"C {_g(model.C)}", f"tol {_g(model.tol)}", f"b {_g(model.bias)}"]
    for lam, yy, sv in zip(model.multipliers, model.labels, model.support_vectors):
        lines.append(" ".join([_g(lam), "%d" % yy] + [_g(v) for v in sv]))
    return "\n".join(lines) + "\n"


def loads_model(text: str) -> SvmModel:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0].strip() != MODEL_HEADER:
        raise ValueError(f"not a model file: expected header {MODEL_HEADER!r}")
    values = {}
    for ln, key in zip(lines[1:4], ("C", "tol", "b")):
        name, _, val = ln.partition(" ")
        if name != key:
            raise ValueError(f"expected {key!r} line, found {ln!r}")
        values[key] = float(val)
    rows = [ln.split() for ln in lines[4:]]
    if rows:
        lam = np.array([float(r[0]) for r in rows])
        lab = np.array([float(int(r[1])) for r in rows])
        sv = np.array([[float(v) for v in r[2:]] for r in rows])
    else:
        lam, lab, sv = np.zeros(0), np.zeros(0), np.zeros((0, 3))
    return SvmModel(sv, lam, lab, values["b"], values["C"], values["tol"])
