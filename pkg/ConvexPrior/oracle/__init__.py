"""
Brute-force verifiers and synthetic shapes used to validate the core library.
"""

from .shapes import (
    SHAPE_KINDS,
    CONVEX_KINDS,
    NONCONVEX_KINDS,
    ShapeSpec,
    make_shape,
    default_shape_spec,
    shape_suite
)

from .hull import (
    HullDeficit,
    convex_hull,
    fill_polygon,
    hull_deficit,
    mask_hull_deficit,
    hull_fill,
    rasterization_slack
)

from .brute_force import brute_force_quasiconcave
from .gradients import fd_gradient, kink_mask, pointwise_gradient_error, relative_gradient_error
from .metrics import dice, count_components

__all__ = [
    'SHAPE_KINDS',
    'CONVEX_KINDS',
    'NONCONVEX_KINDS',
    'ShapeSpec',
    'make_shape',
    'default_shape_spec',
    'shape_suite',
    'HullDeficit',
    'convex_hull',
    'fill_polygon',
    'hull_deficit',
    'mask_hull_deficit',
    'hull_fill',
    'rasterization_slack',
    'brute_force_quasiconcave',
    'fd_gradient',
    'kink_mask',
    'relative_gradient_error',
    'pointwise_gradient_error',
    'dice',
    'count_components'
]
