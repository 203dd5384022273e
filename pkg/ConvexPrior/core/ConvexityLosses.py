"""
First- and second-order convexity losses with closed-form gradients.

Both losses are normalized by the full pixel count |Omega| even though their sums skip
the border band; the first-order loss adds up to |O_r| pair terms per anchor, so its
scale grows with the window radius.
"""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Dict, Union

import numpy as np

from .ConvexPriorErrors import InvalidArgumentError
from .ScalarField import (
    ScalarField,
    interior_mask,
    make_offsets,
    shifted_window,
    sigmoid,
)
from .StencilOps import (
    DEFAULT_EPS_G,
    DX,
    DXX,
    DY,
    DYY,
    MIXED_STENCILS,
    apply_adjoint_array,
    derivative_fields,
)

logger = logging.getLogger('convex_prior')
debug_logger = logging.getLogger('debug_convex_prior')


class LossKind(Enum):
    FIRST_ORDER = '1st'
    SECOND_ORDER = '2nd'

    @classmethod
    def parse(cls, value: Union[str, 'LossKind']) -> 'LossKind':
        if isinstance(value, cls):
            return value
        aliases = {
            '1st': cls.FIRST_ORDER, 'first_order': cls.FIRST_ORDER, 'first': cls.FIRST_ORDER, '1': cls.FIRST_ORDER,
            '2nd': cls.SECOND_ORDER, 'second_order': cls.SECOND_ORDER, 'second': cls.SECOND_ORDER, '2': cls.SECOND_ORDER,
        }
        try:
            return aliases[str(value).strip().lower()]
        except KeyError:
            raise InvalidArgumentError(f"Unknown loss kind '{value}', expected 1st or 2nd")


@dataclass(frozen=True)
class LossConfig:
    radius: float = 2.0
    eps_sigmoid: float = 0.05
    delta: float = 1e-3
    eps_g: float = DEFAULT_EPS_G
    border: int = 2
    mixed_stencil: str = 'composite'

    def __post_init__(self):
        if not self.radius >= 1:
            raise InvalidArgumentError(f"radius must be >= 1, got {self.radius}")
        if not self.eps_sigmoid > 0:
            raise InvalidArgumentError(f"eps_sigmoid must be > 0, got {self.eps_sigmoid}")
        if not self.delta >= 0:
            raise InvalidArgumentError(f"delta must be >= 0, got {self.delta}")
        if not self.eps_g > 0:
            raise InvalidArgumentError(f"eps_g must be > 0, got {self.eps_g}")
        if int(self.border) != self.border or self.border < 0:
            raise InvalidArgumentError(f"border must be a nonnegative integer, got {self.border}")
        if self.mixed_stencil not in MIXED_STENCILS:
            raise InvalidArgumentError(f"mixed_stencil must be one of {MIXED_STENCILS}")


@dataclass(frozen=True)
class LossResult:
    value: float
    per_pixel: ScalarField


def _pair_terms(u: ScalarField, cfg: LossConfig):
    """
    Yield, per window offset d, the anchor/target slices and the pair quantities
    a = grad u(y) . d, S = Sigmoid_eps(u(x) - u(y)) and the anchor activity mask.
    """
    values = u.data
    fields = derivative_fields(u, cfg.mixed_stencil)
    inside = interior_mask(values.shape, cfg.border)
    for d in make_offsets(cfg.radius):
        (ry, cy), (rx, cx) = shifted_window(values.shape, d)
        if values[ry, cy].size == 0:
            continue
        directional = fields.ux[ry, cy] * d[0] + fields.uy[ry, cy] * d[1]
        gate = sigmoid(values[rx, cx] - values[ry, cy], cfg.eps_sigmoid)
        yield d, (ry, cy), (rx, cx), directional, gate, inside[ry, cy]


def loss_first_order(u: ScalarField, cfg: LossConfig = LossConfig()) -> LossResult:
    """L1st = (1/|Omega|) sum_y sum_{x in N_y} Sigmoid_eps(u(x)-u(y)) ReLU(-grad u(y) . (x-y))"""
    per_pixel = np.zeros(u.shape)
    for _, (ry, cy), _, directional, gate, active in _pair_terms(u, cfg):
        per_pixel[ry, cy] += np.where(active, gate * np.maximum(0.0, -directional), 0.0)
    return LossResult(value=float(per_pixel.sum() / u.size), per_pixel=ScalarField(per_pixel))


def grad_first_order(u: ScalarField, cfg: LossConfig = LossConfig()) -> ScalarField:
    """
    Exact gradient of loss_first_order.

    Collects u(p) as a source value, as an anchor value, and through the anchor
    gradient; the last part goes through the auxiliary fields C_x, C_y and the
    adjoints of Dx, Dy.
    """
    grad = np.zeros(u.shape)
    c_x = np.zeros(u.shape)
    c_y = np.zeros(u.shape)
    for d, (ry, cy), (rx, cx), directional, gate, active in _pair_terms(u, cfg):
        relu = np.maximum(0.0, -directional)
        # sigma'_eps from the already evaluated sigmoid
        weighted = np.where(active, gate * (1.0 - gate) / cfg.eps_sigmoid * relu, 0.0)
        grad[rx, cx] += weighted
        grad[ry, cy] -= weighted
        opened = np.where(active & (directional < 0), gate, 0.0)
        c_x[ry, cy] -= opened * d[0]
        c_y[ry, cy] -= opened * d[1]
    grad += apply_adjoint_array(DX, c_x) + apply_adjoint_array(DY, c_y)
    return ScalarField(grad / u.size)


def loss_second_order(u: ScalarField, cfg: LossConfig = LossConfig()) -> LossResult:
    """L2nd = (1/|Omega|) sum_x ||grad u(x)|| ReLU(Q2(x) + delta)"""
    fields = derivative_fields(u, cfg.mixed_stencil)
    per_pixel = fields.magnitude(cfg.eps_g) * np.maximum(0.0, fields.q2() + cfg.delta)
    per_pixel[~interior_mask(u.shape, cfg.border)] = 0.0
    return LossResult(value=float(per_pixel.sum() / u.size), per_pixel=ScalarField(per_pixel))


def grad_second_order(u: ScalarField, cfg: LossConfig = LossConfig()) -> ScalarField:
    """Exact gradient of loss_second_order, one adjoint-stencil term per partial derivative"""
    fields = derivative_fields(u, cfg.mixed_stencil)
    ux, uy, uxx, uyy, uxy = fields.ux, fields.uy, fields.uxx, fields.uyy, fields.uxy
    inside = interior_mask(u.shape, cfg.border)
    magnitude = fields.magnitude(cfg.eps_g)
    shifted = fields.q2() + cfg.delta
    relu = np.where(inside, np.maximum(0.0, shifted), 0.0)
    # H = 1[Q2 + delta > 0], zero on the kink
    gated = np.where(inside & (shifted > 0), magnitude, 0.0)

    grad = apply_adjoint_array(DX, relu * ux / magnitude)
    grad += apply_adjoint_array(DY, relu * uy / magnitude)
    grad += apply_adjoint_array(DX, gated * (2.0 * ux * uyy - 2.0 * uy * uxy))
    grad += apply_adjoint_array(DY, gated * (2.0 * uy * uxx - 2.0 * ux * uxy))
    grad += apply_adjoint_array(DXX, gated * uy ** 2)
    grad += apply_adjoint_array(DYY, gated * ux ** 2)
    grad += apply_adjoint_array(fields.mixed, gated * (-2.0 * ux * uy))
    return ScalarField(grad / u.size)


def grad_wrt_logits(grad_u: ScalarField, u: ScalarField) -> ScalarField:
    """Chain rule through u = Sigmoid(o): grad_o = grad_u * u(1-u)"""
    if grad_u.shape != u.shape:
        raise InvalidArgumentError(f"Shape mismatch: {grad_u.shape} vs {u.shape}")
    return ScalarField(grad_u.data * u.data * (1.0 - u.data))


_LOSSES: Dict[LossKind, Callable[[ScalarField, LossConfig], LossResult]] = {
    LossKind.FIRST_ORDER: loss_first_order,
    LossKind.SECOND_ORDER: loss_second_order,
}

_GRADIENTS: Dict[LossKind, Callable[[ScalarField, LossConfig], ScalarField]] = {
    LossKind.FIRST_ORDER: grad_first_order,
    LossKind.SECOND_ORDER: grad_second_order,
}


def loss_value(kind: Union[str, LossKind], u: ScalarField, cfg: LossConfig = LossConfig()) -> LossResult:
    return _LOSSES[LossKind.parse(kind)](u, cfg)


def loss_gradient(kind: Union[str, LossKind], u: ScalarField, cfg: LossConfig = LossConfig()) -> ScalarField:
    return _GRADIENTS[LossKind.parse(kind)](u, cfg)
