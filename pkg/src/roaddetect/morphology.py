"""Binary morphology for post-processing the road mask."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .raster import as_mask

CROSS = frozenset({(0, 0), (1, 0), (-1, 0), (0, 1), (0, -1)})
SQUARE = frozenset((dy, dx) for dy in (-1, 0, 1) for dx in (-1, 0, 1))

_CONNECTIVITY = {
    4: np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]], dtype=bool),
    8: np.ones((3, 3), dtype=bool),
}


@dataclass(frozen=True)
class LabelMap:
    labels: np.ndarray
    count: int

    def sizes(self) -> np.ndarray:
        """Pixel count per label; index 0 is the background."""
        return np.bincount(self.labels.ravel(), minlength=self.count + 1)


def structuring_element(offsets) -> frozenset:
    """Validate an offset set: must contain the origin and be symmetric."""
    b = frozenset((int(dy), int(dx)) for dy, dx in offsets)
    if (0, 0) not in b:
        raise ValueError("structuring element must contain (0, 0)")
    if any((-dy, -dx) not in b for dy, dx in b):
        raise ValueError("structuring element must be symmetric")
    return b


def connected_components(mask, connectivity: int = 8) -> LabelMap:
    """Label foreground components in raster-scan first-encounter order."""
    m = as_mask(mask)
    if connectivity not in _CONNECTIVITY:
        raise ValueError("connectivity must be 4 or 8")
    labels, count = ndimage.label(m, structure=_CONNECTIVITY[connectivity])
    return LabelMap(labels=labels.astype(np.int64), count=int(count))


def largest_component(labels: LabelMap) -> np.ndarray:
    """Mask of the biggest component; ties go to the smallest label."""
    if labels.count == 0:
        return np.zeros(labels.labels.shape, dtype=bool)
    sizes = labels.sizes()
    sizes[0] = -1
    return labels.labels == int(np.argmax(sizes))


def dilate(x: np.ndarray, element=CROSS) -> np.ndarray:
    """Binary dilation by an offset set; pixels beyond the border are empty."""
    h, w = x.shape
    out = np.zeros_like(x)
    for dy, dx in element:
        # out[y, x] |= x[y - dy, x - dx]
        ys, yd = slice(max(0, -dy), h - max(0, dy)), slice(max(0, dy), h - max(0, -dy))
        xs, xd = slice(max(0, -dx), w - max(0, dx)), slice(max(0, dx), w - max(0, -dx))
        out[yd, xd] |= x[ys, xs]
    return out


def conditional_dilation(seed, constraint, element=CROSS) -> np.ndarray:
    """Iterate X_k = (X_{k-1} dilated by B) & constraint until it stops changing."""
    allowed = as_mask(constraint)
    x = as_mask(seed) & allowed
    while True:
        nxt = dilate(x, element) & allowed
        if np.array_equal(nxt, x):
            return x
        x = nxt


def border_seed(mask: np.ndarray) -> np.ndarray:
    edge = np.zeros_like(mask)
    edge[0, :] = edge[-1, :] = True
    edge[:, 0] = edge[:, -1] = True
    return edge & mask


def fill_holes(mask, element=CROSS) -> np.ndarray:
    """Fill background regions that cannot reach the image border.

    Border reachability is grown by conditional dilation over the background
    with ``element`` (the 4-connected cross by default). Whatever background
    stays unreached is a hole and joins the foreground.
    """
    a = as_mask(mask)
    b = structuring_element(element)
    background = ~a
    outside = conditional_dilation(border_seed(background), background, b)
    return a | (background & ~outside)


def extract_road(mask, element=CROSS) -> np.ndarray:
    """Largest 8-connected region of ``mask`` with its holes filled."""
    return fill_holes(largest_component(connected_components(mask, 8)), element)
