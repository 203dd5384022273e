"""
Projection of a mask onto fields whose super-level sets are digitally convex.

The mask is floor-quantized to `levels` grey levels, then every quantized
super-level set is replaced by the lattice points of its convex hull. The hulls
of nested sets are nested, so stacking them gives the smallest field above the
quantized mask with convex super-level sets.
"""

import logging
from math import gcd

import numpy as np
from scipy.spatial import ConvexHull

from .ConvexPriorErrors import InvalidArgumentError
from .ScalarField import BinaryMask, ScalarField

logger = logging.getLogger('convex_prior')
debug_logger = logging.getLogger('debug_convex_prior')

DEFAULT_LEVELS = 256
# lattice points off a hull edge sit at least 1/edge_length away from it
HULL_TOLERANCE = 1e-7


def _row_extremes(data: np.ndarray) -> np.ndarray:
    rows = np.flatnonzero(data.any(axis=1))
    first = np.argmax(data[rows], axis=1)
    last = data.shape[1] - 1 - np.argmax(data[rows, ::-1], axis=1)
    return np.concatenate([np.stack([rows, first], axis=1), np.stack([rows, last], axis=1)])


def _is_collinear(points: np.ndarray) -> bool:
    origin = points[0]
    spread = points - origin
    far = spread[np.argmax(np.abs(spread).sum(axis=1))]
    cross = far[0] * spread[:, 1] - far[1] * spread[:, 0]
    return not np.any(cross)


def _fill_segment(points: np.ndarray, shape) -> np.ndarray:
    """Lattice points on the segment spanned by collinear integer points"""
    order = np.lexsort((points[:, 1], points[:, 0]))
    start, end = points[order[0]], points[order[-1]]
    filled = np.zeros(shape, dtype=bool)
    dx, dy = int(end[0] - start[0]), int(end[1] - start[1])
    steps = gcd(abs(dx), abs(dy))
    if steps == 0:
        filled[start[0], start[1]] = True
        return filled
    k = np.arange(steps + 1)
    filled[start[0] + k * (dx // steps), start[1] + k * (dy // steps)] = True
    return filled


def _fill_hull(points: np.ndarray, shape) -> np.ndarray:
    """Row-wise fill of the lattice points inside the convex hull of `points`"""
    hull = ConvexHull(points.astype(np.float64))
    normals = hull.equations[:, :2]
    offsets = hull.equations[:, 2]
    x_lo, x_hi = int(points[:, 0].min()), int(points[:, 0].max())
    xs = np.arange(x_lo, x_hi + 1, dtype=np.float64)
    lo = np.full(xs.shape, -np.inf)
    hi = np.full(xs.shape, np.inf)
    # facet: a x + b y + c <= 0, solved for y on every row
    for (a, b), c in zip(normals, offsets):
        if abs(b) < 1e-12:
            continue
        bound = -(a * xs + c) / b
        if b > 0:
            hi = np.minimum(hi, bound)
        else:
            lo = np.maximum(lo, bound)
    lo = np.ceil(lo - HULL_TOLERANCE)
    hi = np.floor(hi + HULL_TOLERANCE)
    cols = np.arange(shape[1])[None, :]
    inside = (cols >= lo[:, None]) & (cols <= hi[:, None])
    filled = np.zeros(shape, dtype=bool)
    filled[x_lo:x_hi + 1] = inside
    return filled


def level_set_hull_fill(mask: BinaryMask) -> BinaryMask:
    """
    Lattice points of the convex hull of a binary mask.

    Collinear sets fill their lattice segment; an empty mask stays empty.
    """
    data = mask.as_bool()
    if not data.any():
        return BinaryMask(np.zeros(data.shape, dtype=np.uint8))
    points = _row_extremes(data)
    if len(np.unique(points, axis=0)) < 3 or _is_collinear(points):
        filled = _fill_segment(points, data.shape)
    else:
        filled = _fill_hull(points, data.shape)
    return BinaryMask((filled | data).astype(np.uint8))


def quasi_concave_envelope(u: ScalarField, levels: int = DEFAULT_LEVELS) -> ScalarField:
    """
    Smallest field above floor(levels * u) / levels whose super-level sets are
    lattice-convex.

    Args:
        u: Mask field with values in [0, 1]
        levels: Number of grey levels (>= 2)

    Returns:
        ScalarField: Mask field taking values k / levels, k = 0..levels
    """
    if int(levels) != levels or levels < 2:
        raise InvalidArgumentError(f"levels must be an integer >= 2, got {levels}")
    levels = int(levels)
    if not np.all(np.isfinite(u.data)):
        raise InvalidArgumentError("quasi_concave_envelope needs a finite field")
    steps = np.floor(np.clip(u.data, 0.0, 1.0) * levels).astype(np.int64)
    out = np.zeros(u.shape)
    for k in np.unique(steps[steps > 0]):
        filled = level_set_hull_fill(BinaryMask((steps >= k).astype(np.uint8))).as_bool()
        out[filled] = k / levels
    debug_logger.debug(f"envelope over {len(np.unique(steps))} grey levels, raised {np.count_nonzero(out > steps / levels)} pixels")
    return ScalarField(out, is_mask=True)
