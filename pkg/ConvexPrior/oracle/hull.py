"""
Discrete convex hulls of binarized super-level sets and the hull-deficit metric.
"""

import logging
from dataclasses import dataclass
from typing import Iterable, List, Sequence, Tuple

import numpy as np

from ..core.ConvexPriorErrors import EmptySetError, InvalidArgumentError
from ..core.ScalarField import BinaryMask, ScalarField, threshold

logger = logging.getLogger('convex_prior')

Point = Tuple[int, int]


@dataclass(frozen=True)
class HullDeficit:
    gamma: float
    deficit: float
    hull_area: int
    set_area: int
    # hull perimeter in pixels, for the rasterization budget
    perimeter: float = 0.0

    @property
    def slack(self) -> float:
        return rasterization_slack_from_perimeter(self.perimeter, self.hull_area)


def _cross(o: Point, a: Point, b: Point) -> int:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def convex_hull(points: Iterable[Sequence[int]]) -> List[Point]:
    """
    Convex hull by Andrew's monotone chain.

    Args:
        points: Integer (x, y) pairs, at least one

    Returns:
        list: Hull vertices in counterclockwise order without repeats; collinear
        input yields its two extreme points, a single point yields itself
    """
    unique = sorted({(int(p[0]), int(p[1])) for p in points})
    if not unique:
        raise InvalidArgumentError("convex_hull needs at least one point")
    if len(unique) <= 2:
        return unique

    lower: List[Point] = []
    for p in unique:
        while len(lower) >= 2 and _cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper: List[Point] = []
    for p in reversed(unique):
        while len(upper) >= 2 and _cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return lower[:-1] + upper[:-1]


def fill_polygon(vertices: Sequence[Point], h: int, w: int) -> BinaryMask:
    """
    Rasterize a convex polygon given counterclockwise: a pixel is in when it lies on
    the inner side of, or on, every edge. Degenerate polygons fill their segment or point.
    """
    if not vertices:
        raise InvalidArgumentError("fill_polygon needs at least one vertex")
    x, y = np.mgrid[0:h, 0:w]
    xs = [v[0] for v in vertices]
    ys = [v[1] for v in vertices]
    inside = (x >= min(xs)) & (x <= max(xs)) & (y >= min(ys)) & (y <= max(ys))
    count = len(vertices)
    if count == 1:
        return BinaryMask(inside.astype(np.uint8))
    for i in range(count):
        a, b = vertices[i], vertices[(i + 1) % count]
        side = (b[0] - a[0]) * (y - a[1]) - (b[1] - a[1]) * (x - a[0])
        inside &= side >= 0
    return BinaryMask(inside.astype(np.uint8))


def boundary_points(mask: BinaryMask) -> List[Point]:
    """Leftmost and rightmost foreground pixel of every row; enough to span the hull"""
    points: List[Point] = []
    data = mask.as_bool()
    for row in np.flatnonzero(data.any(axis=1)):
        cols = np.flatnonzero(data[row])
        points.append((int(row), int(cols[0])))
        points.append((int(row), int(cols[-1])))
    return points


def polygon_perimeter(vertices: Sequence[Point]) -> float:
    if len(vertices) < 2:
        return 0.0
    v = np.asarray(vertices, dtype=np.float64)
    return float(np.sum(np.hypot(*(np.roll(v, -1, axis=0) - v).T)))


def rasterization_slack_from_perimeter(perimeter: float, hull_area: int) -> float:
    return float(perimeter) / float(max(hull_area, 1))


def rasterization_slack(hull: Sequence[Point], area: int) -> float:
    """Per-shape budget: hull perimeter in pixels divided by the hull area"""
    return rasterization_slack_from_perimeter(polygon_perimeter(hull), area)


def mask_hull_deficit(mask: BinaryMask, gamma: float = 0.5) -> HullDeficit:
    set_area = mask.area()
    if set_area == 0:
        raise EmptySetError(f"Super-level set at gamma={gamma} is empty")
    hull = convex_hull(boundary_points(mask))
    filled = fill_polygon(hull, mask.height, mask.width)
    # the fill contains every set pixel; the union guards degenerate rounding
    hull_area = int(np.count_nonzero(filled.as_bool() | mask.as_bool()))
    return HullDeficit(
        gamma=gamma,
        deficit=(hull_area - set_area) / max(hull_area, 1),
        hull_area=hull_area,
        set_area=set_area,
        perimeter=polygon_perimeter(hull),
    )


def hull_deficit(u: ScalarField, gamma: float = 0.5) -> HullDeficit:
    """
    Fraction of the discrete hull of S_gamma = {u >= gamma} not covered by S_gamma.

    Raises:
        EmptySetError: When S_gamma has no pixels
    """
    return mask_hull_deficit(threshold(u, gamma), gamma)


def hull_fill(u: ScalarField, gamma: float = 0.5) -> BinaryMask:
    """Discrete hull fill of S_gamma, or an all-zero mask for an empty set"""
    mask = threshold(u, gamma)
    if mask.area() == 0:
        return mask
    return fill_polygon(convex_hull(boundary_points(mask)), mask.height, mask.width)
