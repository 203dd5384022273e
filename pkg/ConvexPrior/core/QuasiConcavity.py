"""
Zero-, first- and second-order quasi-concavity checks on a mask field.

Every checker returns a ViolationReport whose magnitude field holds the per-pixel
residual of the corresponding inequality, restricted to an r-radius window.
Passing a window check says nothing about pairs farther apart than r.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np
from scipy import ndimage

from .ConvexPriorErrors import InvalidArgumentError
from .ScalarField import (
    BinaryMask,
    ScalarField,
    interior_mask,
    make_offsets,
    shifted_window,
)
from .StencilOps import DEFAULT_EPS_G, MIXED_STENCILS, derivative_fields

logger = logging.getLogger('convex_prior')
debug_logger = logging.getLogger('debug_convex_prior')

EXACT_TOLERANCE = 1e-9
GEOMETRY_TOLERANCE = 1e-3

FIRST_ORDER_GRADIENTS = ('central', 'forward')


@dataclass(frozen=True)
class ConditionConfig:
    radius: float = 2.0
    tolerance: float = EXACT_TOLERANCE
    delta: float = 0.0
    border: int = 2
    eps_g: float = DEFAULT_EPS_G
    mixed_stencil: str = 'composite'
    gradient: str = 'central'

    def __post_init__(self):
        if not self.radius >= 1:
            raise InvalidArgumentError(f"radius must be >= 1, got {self.radius}")
        if not self.tolerance >= 0:
            raise InvalidArgumentError(f"tolerance must be >= 0, got {self.tolerance}")
        if not self.delta >= 0:
            raise InvalidArgumentError(f"delta must be >= 0, got {self.delta}")
        if int(self.border) != self.border or self.border < 0:
            raise InvalidArgumentError(f"border must be a nonnegative integer, got {self.border}")
        if not self.eps_g > 0:
            raise InvalidArgumentError(f"eps_g must be > 0, got {self.eps_g}")
        if self.mixed_stencil not in MIXED_STENCILS:
            raise InvalidArgumentError(f"mixed_stencil must be one of {MIXED_STENCILS}")
        if self.gradient not in FIRST_ORDER_GRADIENTS:
            raise InvalidArgumentError(f"gradient must be one of {FIRST_ORDER_GRADIENTS}")


@dataclass(frozen=True)
class ViolationReport:
    magnitude: ScalarField
    count: int
    max_violation: float
    tolerance: float
    order: Optional[int] = None
    radius: Optional[float] = None
    # gamma -> violation count, filled by level-set oracles
    per_gamma: Dict[float, int] = field(default_factory=dict)

    @classmethod
    def from_magnitude(cls, magnitude: np.ndarray, tolerance: float, order: Optional[int] = None,
                       radius: Optional[float] = None) -> 'ViolationReport':
        magnitude = np.maximum(magnitude, 0.0)
        return cls(
            magnitude=ScalarField(magnitude),
            count=int(np.count_nonzero(magnitude > tolerance)),
            max_violation=float(magnitude.max()),
            tolerance=tolerance,
            order=order,
            radius=radius,
        )

    @property
    def passed(self) -> bool:
        return self.count == 0


def q2_field(u: ScalarField, mixed_stencil: str = 'composite') -> ScalarField:
    """Q2 = ux^2 uyy - 2 ux uy uxy + uy^2 uxx, the Hessian along the level-set tangent"""
    return ScalarField(derivative_fields(u, mixed_stencil).q2())


def curvature_field(u: ScalarField, eps_g: float = DEFAULT_EPS_G,
                    mixed_stencil: str = 'composite') -> ScalarField:
    """Level-contour curvature kappa = -Q2 / ||grad u||^3 with the smoothed magnitude"""
    if not eps_g > 0:
        raise InvalidArgumentError(f"eps_g must be > 0, got {eps_g}")
    fields = derivative_fields(u, mixed_stencil)
    return ScalarField(-fields.q2() / fields.magnitude(eps_g) ** 3)


def check_zero_order(u: ScalarField, cfg: ConditionConfig = ConditionConfig()) -> ViolationReport:
    """
    Midpoint test u(m) >= min(u(y), u(z)) for m = y + d, z = y + 2d, d in the window.

    Triples whose reflected point z leaves the grid are skipped. The violation is
    reported at the midpoint m.
    """
    values = u.data
    magnitude = np.zeros_like(values)
    for d in make_offsets(cfg.radius):
        (ry, cy), (rz, cz) = shifted_window(values.shape, d, scale=2)
        anchors = values[ry, cy]
        if anchors.size == 0:
            continue
        ends = values[rz, cz]
        # midpoints share the anchor extent, shifted by d
        rows_m = slice(ry.start + d[0], ry.stop + d[0])
        cols_m = slice(cy.start + d[1], cy.stop + d[1])
        residual = np.minimum(anchors, ends) - values[rows_m, cols_m]
        np.maximum(magnitude[rows_m, cols_m], residual, out=magnitude[rows_m, cols_m])
    report = ViolationReport.from_magnitude(magnitude, cfg.tolerance, order=0, radius=cfg.radius)
    debug_logger.debug(f"zero-order check r={cfg.radius}: count={report.count} max={report.max_violation:.3e}")
    return report


def check_first_order(u: ScalarField, cfg: ConditionConfig = ConditionConfig()) -> ViolationReport:
    """
    Supporting-hyperplane test: u(x) >= u(y) implies grad u(y) . (x - y) >= 0.

    The violation max(0, -grad u(y) . d) is reported at the anchor y, maximized over
    offsets. Anchors within cfg.border of the frame are excluded.

    With cfg.gradient == 'central' the gradient at y is (u(y+e) - u(y-e)) / 2, which
    is the forward difference minus half the second difference. The forward
    gradient is only first-order accurate and flags smooth quasi-concave bumps
    such as Gaussians.
    """
    values = u.data
    fields = derivative_fields(u, cfg.mixed_stencil)
    if cfg.gradient == 'central':
        gx = fields.ux - 0.5 * fields.uxx
        gy = fields.uy - 0.5 * fields.uyy
    else:
        gx, gy = fields.ux, fields.uy
    magnitude = np.zeros_like(values)
    for d in make_offsets(cfg.radius):
        (ry, cy), (rx, cx) = shifted_window(values.shape, d)
        anchors = values[ry, cy]
        if anchors.size == 0:
            continue
        uphill = values[rx, cx] >= anchors
        directional = gx[ry, cy] * d[0] + gy[ry, cy] * d[1]
        residual = np.where(uphill, -directional, 0.0)
        np.maximum(magnitude[ry, cy], residual, out=magnitude[ry, cy])
    magnitude[~interior_mask(values.shape, cfg.border)] = 0.0
    report = ViolationReport.from_magnitude(magnitude, cfg.tolerance, order=1, radius=cfg.radius)
    debug_logger.debug(f"first-order check r={cfg.radius}: count={report.count} max={report.max_violation:.3e}")
    return report


def check_second_order(u: ScalarField, cfg: ConditionConfig = ConditionConfig()) -> ViolationReport:
    """Gated tangent-curvature test ||grad u|| * max(0, Q2 + delta), border excluded"""
    fields = derivative_fields(u, cfg.mixed_stencil)
    magnitude = fields.magnitude(cfg.eps_g) * np.maximum(0.0, fields.q2() + cfg.delta)
    magnitude[~interior_mask(u.shape, cfg.border)] = 0.0
    report = ViolationReport.from_magnitude(magnitude, cfg.tolerance, order=2, radius=cfg.radius)
    debug_logger.debug(f"second-order check: count={report.count} max={report.max_violation:.3e}")
    return report


_CHECKERS = {
    0: check_zero_order,
    1: check_first_order,
    2: check_second_order,
}


def check_condition(u: ScalarField, order: int, cfg: ConditionConfig = ConditionConfig()) -> ViolationReport:
    """Run the checker of the given order (0, 1 or 2)"""
    try:
        checker = _CHECKERS[order]
    except KeyError:
        raise InvalidArgumentError(f"order must be 0, 1 or 2, got {order}")
    return checker(u, cfg)


def disk_footprint(r: float) -> np.ndarray:
    """Discrete ball B_r (centre included) as a boolean footprint"""
    if not r >= 1:
        raise InvalidArgumentError(f"radius must be >= 1, got {r}")
    reach = int(np.floor(r))
    d1, d2 = np.mgrid[-reach:reach + 1, -reach:reach + 1]
    return d1 * d1 + d2 * d2 <= r * r


def half_disk_ratio(mask: BinaryMask, r: float) -> ScalarField:
    """
    Foreground fraction |B_r(y) & S| / |B_r| at background pixels, 0 on the foreground.

    A convex foreground keeps this at or below one half (up to the discretization ring).
    """
    footprint = disk_footprint(r)
    covered = ndimage.correlate(mask.data.astype(np.float64), footprint.astype(np.float64),
                                mode='constant', cval=0.0)
    ratio = covered / float(footprint.sum())
    ratio[mask.as_bool()] = 0.0
    return ScalarField(ratio)


def ring_slack(r: float) -> float:
    """Perimeter-pixel count of B_r divided by |B_r|"""
    footprint = disk_footprint(r)
    inner = ndimage.binary_erosion(footprint, border_value=0)
    return float(np.count_nonzero(footprint & ~inner)) / float(footprint.sum())


def margin_field(logits: Sequence[ScalarField], m: int) -> ScalarField:
    """u_m - max_{i != m} u_i; the class-m region is where this is >= 0"""
    if len(logits) < 2:
        raise InvalidArgumentError(f"margin_field needs at least 2 classes, got {len(logits)}")
    if not 0 <= m < len(logits):
        raise InvalidArgumentError(f"class index {m} out of range for {len(logits)} classes")
    shape = logits[0].shape
    for other in logits:
        if other.shape != shape:
            raise InvalidArgumentError(f"Shape mismatch: {other.shape} vs {shape}")
    rivals: List[np.ndarray] = [f.data for i, f in enumerate(logits) if i != m]
    return ScalarField(logits[m].data - np.max(np.stack(rivals), axis=0))


def check_margin_field(logits: Sequence[ScalarField], m: int, order: int,
                       cfg: ConditionConfig = ConditionConfig()) -> ViolationReport:
    """Quasi-concavity check of the class-m margin field"""
    return check_condition(margin_field(logits, m), order, cfg)
