"""
Synthetic toy shapes: analytic signed distance functions pushed through a sigmoid.

SDFs are negative inside. A pixel p = (row, col) gets u(p) = Sigmoid(sharpness * -SDF(p)),
so u >= 0.5 exactly on the closed shape.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Tuple

import numpy as np
from scipy.special import expit

from ..core.ConvexPriorErrors import InvalidArgumentError
from ..core.ScalarField import ScalarField

logger = logging.getLogger('convex_prior')

SHAPE_KINDS = ('disk', 'ellipse', 'star', 'cross', 'l_shape', 'crescent', 'two_disks')
CONVEX_KINDS = ('disk', 'ellipse')
NONCONVEX_KINDS = ('star', 'cross', 'l_shape', 'crescent')

# Minimum free pixels between a shape's bounding box and the frame
SHAPE_MARGIN = 4

REQUIRED_PARAMS: Dict[str, Tuple[str, ...]] = {
    'disk': ('cx', 'cy', 'radius'),
    'ellipse': ('cx', 'cy', 'a', 'b'),
    'star': ('cx', 'cy', 'arms', 'outer', 'inner'),
    'cross': ('cx', 'cy', 'arm', 'half_width'),
    'l_shape': ('cx', 'cy', 'size', 'thickness'),
    'crescent': ('cx', 'cy', 'radius', 'cut_radius', 'offset'),
    'two_disks': ('cx', 'cy', 'radius', 'gap'),
}


@dataclass(frozen=True)
class ShapeSpec:
    kind: str
    params: Dict[str, float] = field(default_factory=dict)
    sharpness: float = 1.0

    def __post_init__(self):
        if self.kind not in SHAPE_KINDS:
            raise InvalidArgumentError(f"Unknown shape kind '{self.kind}', expected one of {SHAPE_KINDS}")
        missing = [name for name in REQUIRED_PARAMS[self.kind] if name not in self.params]
        if missing:
            raise InvalidArgumentError(f"Shape '{self.kind}' is missing parameters: {', '.join(missing)}")
        if not self.sharpness > 0:
            raise InvalidArgumentError(f"sharpness must be > 0, got {self.sharpness}")


def _grid(h: int, w: int) -> Tuple[np.ndarray, np.ndarray]:
    rows, cols = np.mgrid[0:h, 0:w]
    return rows.astype(np.float64), cols.astype(np.float64)


def sd_disk(x: np.ndarray, y: np.ndarray, cx: float, cy: float, radius: float) -> np.ndarray:
    return np.hypot(x - cx, y - cy) - radius


def sd_ellipse(x: np.ndarray, y: np.ndarray, cx: float, cy: float, a: float, b: float) -> np.ndarray:
    """Scaled implicit distance; exact sign, distance exact on the axes of a circle"""
    return (np.hypot((x - cx) / a, (y - cy) / b) - 1.0) * min(a, b)


def sd_box(x: np.ndarray, y: np.ndarray, cx: float, cy: float, hx: float, hy: float) -> np.ndarray:
    """Axis-aligned box with half-extents (hx, hy)"""
    qx = np.abs(x - cx) - hx
    qy = np.abs(y - cy) - hy
    outside = np.hypot(np.maximum(qx, 0.0), np.maximum(qy, 0.0))
    return outside + np.minimum(np.maximum(qx, qy), 0.0)


def sd_polygon(x: np.ndarray, y: np.ndarray, vertices: np.ndarray) -> np.ndarray:
    """Exact distance to a simple polygon, signed by an even-odd crossing test"""
    dist2 = np.full(x.shape, np.inf)
    inside = np.zeros(x.shape, dtype=bool)
    count = len(vertices)
    for i in range(count):
        ax, ay = vertices[i]
        bx, by = vertices[i - 1]
        ex, ey = bx - ax, by - ay
        wx, wy = x - ax, y - ay
        t = np.clip((wx * ex + wy * ey) / (ex * ex + ey * ey), 0.0, 1.0)
        dist2 = np.minimum(dist2, (wx - ex * t) ** 2 + (wy - ey * t) ** 2)
        if ay == by:
            continue
        straddles = (ay <= y) != (by <= y)
        crossing = ax + (y - ay) * (bx - ax) / (by - ay)
        inside ^= straddles & (x < crossing)
    return np.where(inside, -1.0, 1.0) * np.sqrt(dist2)


def star_vertices(cx: float, cy: float, arms: int, outer: float, inner: float,
                  rotation: float = -np.pi / 2) -> np.ndarray:
    angles = rotation + np.arange(2 * arms) * np.pi / arms
    radii = np.where(np.arange(2 * arms) % 2 == 0, outer, inner)
    return np.stack([cx + radii * np.cos(angles), cy + radii * np.sin(angles)], axis=1)


def _l_boxes(p: Dict[str, float]) -> List[Tuple[float, float, float, float]]:
    """The two bars of the L as (cx, cy, hx, hy): a full-height stem and a bottom foot"""
    half, t = p['size'] / 2.0, p['thickness']
    top, left = p['cx'] - half, p['cy'] - half
    stem = (p['cx'], left + t / 2.0, half, t / 2.0)
    foot = (top + p['size'] - t / 2.0, p['cy'], t / 2.0, half)
    return [stem, foot]


def _two_disk_centres(p: Dict[str, float]) -> List[Tuple[float, float]]:
    shift = p['radius'] + p['gap'] / 2.0
    return [(p['cx'], p['cy'] - shift), (p['cx'], p['cy'] + shift)]


def shape_sdf(spec: ShapeSpec, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    p = spec.params
    if spec.kind == 'disk':
        return sd_disk(x, y, p['cx'], p['cy'], p['radius'])
    if spec.kind == 'ellipse':
        return sd_ellipse(x, y, p['cx'], p['cy'], p['a'], p['b'])
    if spec.kind == 'star':
        vertices = star_vertices(p['cx'], p['cy'], int(p['arms']), p['outer'], p['inner'],
                                 p.get('rotation', -np.pi / 2))
        return sd_polygon(x, y, vertices)
    if spec.kind == 'cross':
        vertical = sd_box(x, y, p['cx'], p['cy'], p['arm'], p['half_width'])
        horizontal = sd_box(x, y, p['cx'], p['cy'], p['half_width'], p['arm'])
        return np.minimum(vertical, horizontal)
    if spec.kind == 'l_shape':
        return np.minimum.reduce([sd_box(x, y, *box) for box in _l_boxes(p)])
    if spec.kind == 'crescent':
        body = sd_disk(x, y, p['cx'], p['cy'], p['radius'])
        bite = sd_disk(x, y, p['cx'], p['cy'] + p['offset'], p['cut_radius'])
        return np.maximum(body, -bite)
    # two_disks
    return np.minimum.reduce([sd_disk(x, y, cx, cy, p['radius']) for cx, cy in _two_disk_centres(p)])


def shape_extent(spec: ShapeSpec) -> Tuple[float, float, float, float]:
    """Bounding box (xmin, xmax, ymin, ymax) of the shape"""
    p = spec.params
    if spec.kind in ('disk', 'crescent'):
        r = p['radius']
        return p['cx'] - r, p['cx'] + r, p['cy'] - r, p['cy'] + r
    if spec.kind == 'ellipse':
        return p['cx'] - p['a'], p['cx'] + p['a'], p['cy'] - p['b'], p['cy'] + p['b']
    if spec.kind == 'star':
        v = star_vertices(p['cx'], p['cy'], int(p['arms']), p['outer'], p['inner'],
                          p.get('rotation', -np.pi / 2))
        return v[:, 0].min(), v[:, 0].max(), v[:, 1].min(), v[:, 1].max()
    if spec.kind == 'cross':
        reach = max(p['arm'], p['half_width'])
        return p['cx'] - reach, p['cx'] + reach, p['cy'] - reach, p['cy'] + reach
    if spec.kind == 'l_shape':
        half = p['size'] / 2.0
        return p['cx'] - half, p['cx'] + half, p['cy'] - half, p['cy'] + half
    r = p['radius']
    centres = _two_disk_centres(p)
    return (min(c[0] for c in centres) - r, max(c[0] for c in centres) + r,
            min(c[1] for c in centres) - r, max(c[1] for c in centres) + r)


def _check_bounds(spec: ShapeSpec, h: int, w: int):
    xmin, xmax, ymin, ymax = shape_extent(spec)
    if xmin < SHAPE_MARGIN or ymin < SHAPE_MARGIN or xmax > h - 1 - SHAPE_MARGIN or ymax > w - 1 - SHAPE_MARGIN:
        raise InvalidArgumentError(
            f"Shape '{spec.kind}' with extent x[{xmin:.1f},{xmax:.1f}] y[{ymin:.1f},{ymax:.1f}] "
            f"does not fit a {h}x{w} field with a {SHAPE_MARGIN}-pixel margin"
        )


def make_shape(spec: ShapeSpec, h: int, w: int) -> ScalarField:
    """
    Render a toy shape as a soft mask.

    Args:
        spec: Shape kind, parameters and sigmoid sharpness
        h: Field height
        w: Field width

    Returns:
        ScalarField: Mask with values in (0,1), >= 0.5 exactly on the shape
    """
    if h < 1 or w < 1:
        raise InvalidArgumentError(f"Field size must be positive, got {h}x{w}")
    _check_bounds(spec, h, w)
    x, y = _grid(h, w)
    sdf = shape_sdf(spec, x, y)
    return ScalarField(expit(spec.sharpness * -sdf), is_mask=True)


def default_shape_spec(kind: str, h: int = 128, w: int = 128, sharpness: float = 1.0) -> ShapeSpec:
    """Toy-suite parameters scaled to an h x w field, centred on an integer pixel"""
    s = float(min(h, w))
    cx, cy = float(h // 2), float(w // 2)
    params = {
        'disk': {'radius': 0.3 * s},
        'ellipse': {'a': 0.35 * s, 'b': 0.2 * s},
        'star': {'arms': 5, 'outer': 0.4 * s, 'inner': 0.18 * s},
        'cross': {'arm': 0.38 * s, 'half_width': 0.1 * s},
        'l_shape': {'size': 0.7 * s, 'thickness': 0.25 * s},
        'crescent': {'radius': 0.35 * s, 'cut_radius': 0.3 * s, 'offset': 0.2 * s},
        'two_disks': {'radius': 0.18 * s, 'gap': 0.12 * s},
    }
    if kind not in params:
        raise InvalidArgumentError(f"Unknown shape kind '{kind}', expected one of {SHAPE_KINDS}")
    return ShapeSpec(kind=kind, params={'cx': cx, 'cy': cy, **params[kind]}, sharpness=sharpness)


def shape_suite(h: int = 128, w: int = 128, sharpness: float = 1.0) -> Dict[str, ShapeSpec]:
    return {kind: default_shape_spec(kind, h, w, sharpness) for kind in SHAPE_KINDS}
