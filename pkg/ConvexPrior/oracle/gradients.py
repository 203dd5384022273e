"""
Finite-difference oracle for the analytic loss gradients.
"""

import logging
from typing import Optional, Union

import numpy as np
from scipy import ndimage

from ..core.ConvexityLosses import LossConfig, LossKind, loss_value
from ..core.ConvexPriorErrors import InvalidArgumentError
from ..core.ScalarField import ScalarField, interior_mask, make_offsets, shifted_window
from ..core.StencilOps import derivative_fields

logger = logging.getLogger('convex_prior')

KINK_THRESHOLD = 1e-4
FD_STEP = 1e-6


def fd_gradient(kind: Union[str, LossKind], u: ScalarField, cfg: LossConfig = LossConfig(),
                step: float = FD_STEP) -> ScalarField:
    """Central differences (L(u + step e_p) - L(u - step e_p)) / (2 step) at every pixel p"""
    if not step > 0:
        raise InvalidArgumentError(f"step must be > 0, got {step}")
    kind = LossKind.parse(kind)
    perturbed = u.values()
    grad = np.zeros(u.shape)
    for p in np.ndindex(*u.shape):
        original = perturbed[p]
        perturbed[p] = original + step
        upper = loss_value(kind, ScalarField(perturbed), cfg).value
        perturbed[p] = original - step
        lower = loss_value(kind, ScalarField(perturbed), cfg).value
        perturbed[p] = original
        grad[p] = (upper - lower) / (2.0 * step)
    return ScalarField(grad)


def kink_mask(kind: Union[str, LossKind], u: ScalarField, cfg: LossConfig = LossConfig(),
              threshold: float = KINK_THRESHOLD) -> np.ndarray:
    """
    Pixels whose finite difference may straddle a ReLU or indicator switch.

    A switch argument within `threshold` of zero at an active pixel marks that pixel
    and its 3x3 neighbourhood, which covers every value its stencils read.
    """
    kind = LossKind.parse(kind)
    inside = interior_mask(u.shape, cfg.border)
    fields = derivative_fields(u, cfg.mixed_stencil)
    if kind is LossKind.SECOND_ORDER:
        near = inside & (np.abs(fields.q2() + cfg.delta) < threshold)
    else:
        near = np.zeros(u.shape, dtype=bool)
        for d in make_offsets(cfg.radius):
            (ry, cy), _ = shifted_window(u.shape, d)
            directional = fields.ux[ry, cy] * d[0] + fields.uy[ry, cy] * d[1]
            near[ry, cy] |= inside[ry, cy] & (np.abs(directional) < threshold)
    return ndimage.binary_dilation(near, structure=np.ones((3, 3), dtype=bool))


def relative_gradient_error(analytic: ScalarField, numeric: ScalarField,
                            excluded: Optional[np.ndarray] = None) -> float:
    """
    Normwise relative error max|a - b| / max(||a||_inf, ||b||_inf) over the
    pixels not in `excluded`.
    """
    if analytic.shape != numeric.shape:
        raise InvalidArgumentError(f"Shape mismatch: {analytic.shape} vs {numeric.shape}")
    keep = np.ones(analytic.shape, dtype=bool) if excluded is None else ~np.asarray(excluded, dtype=bool)
    if not keep.any():
        return 0.0
    a, b = analytic.data[keep], numeric.data[keep]
    diff = float(np.max(np.abs(a - b)))
    scale = max(float(np.max(np.abs(a))), float(np.max(np.abs(b))))
    if scale == 0.0:
        return diff
    return diff / scale


def pointwise_gradient_error(analytic: ScalarField, numeric: ScalarField,
                             excluded: Optional[np.ndarray] = None, floor: float = 1e-8) -> float:
    """
    Largest |a - b| / |b| over kept pixels whose finite difference exceeds `floor`.

    Central differences carry roundoff of order eps * L / step, so pixels with a
    tiny true gradient dominate this figure; it is reported, not tested against.
    """
    if analytic.shape != numeric.shape:
        raise InvalidArgumentError(f"Shape mismatch: {analytic.shape} vs {numeric.shape}")
    keep = np.ones(analytic.shape, dtype=bool) if excluded is None else ~np.asarray(excluded, dtype=bool)
    keep &= np.abs(numeric.data) > floor
    if not keep.any():
        return 0.0
    a, b = analytic.data[keep], numeric.data[keep]
    return float(np.max(np.abs(a - b) / np.abs(b)))
