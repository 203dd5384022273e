from .ConvexPriorErrors import (
    ConvexPriorError,
    InvalidArgumentError,
    EmptySetError,
    FieldFormatError
)

from .ScalarField import (
    ScalarField,
    OffsetSet,
    BinaryMask,
    make_offsets,
    linf_distance,
    threshold,
    mask_to_logits
)

from .StencilOps import (
    Stencil,
    DX,
    DY,
    DXX,
    DYY,
    DXY,
    DXY_COMPOSITE,
    MIXED_STENCILS,
    STENCILS,
    mixed_stencil,
    apply,
    apply_adjoint,
    gradient,
    smoothed_grad_magnitude,
    derivative_fields
)

from .QuasiConcavity import (
    ConditionConfig,
    ViolationReport,
    check_zero_order,
    check_first_order,
    check_second_order,
    check_condition,
    q2_field,
    curvature_field,
    half_disk_ratio,
    ring_slack,
    margin_field,
    check_margin_field
)

from .ConvexityLosses import (
    LossKind,
    LossConfig,
    LossResult,
    loss_first_order,
    loss_second_order,
    grad_first_order,
    grad_second_order,
    grad_wrt_logits,
    loss_value,
    loss_gradient
)

from .ConvexEnvelope import (
    level_set_hull_fill,
    quasi_concave_envelope
)

from .Convexifier import (
    CgpmConfig,
    ConvexifyTrace,
    midpoint_convexify,
    cgpm,
    cgpm_from_mask
)

__all__ = [
    'ConvexPriorError',
    'InvalidArgumentError',
    'EmptySetError',
    'FieldFormatError',
    'ScalarField',
    'OffsetSet',
    'BinaryMask',
    'make_offsets',
    'linf_distance',
    'threshold',
    'mask_to_logits',
    'Stencil',
    'DX',
    'DY',
    'DXX',
    'DYY',
    'DXY',
    'DXY_COMPOSITE',
    'MIXED_STENCILS',
    'STENCILS',
    'mixed_stencil',
    'apply',
    'apply_adjoint',
    'gradient',
    'smoothed_grad_magnitude',
    'derivative_fields',
    'ConditionConfig',
    'ViolationReport',
    'check_zero_order',
    'check_first_order',
    'check_second_order',
    'check_condition',
    'q2_field',
    'curvature_field',
    'half_disk_ratio',
    'ring_slack',
    'margin_field',
    'check_margin_field',
    'LossKind',
    'LossConfig',
    'LossResult',
    'loss_first_order',
    'loss_second_order',
    'grad_first_order',
    'grad_second_order',
    'grad_wrt_logits',
    'loss_value',
    'loss_gradient',
    'level_set_hull_fill',
    'quasi_concave_envelope',
    'CgpmConfig',
    'ConvexifyTrace',
    'midpoint_convexify',
    'cgpm',
    'cgpm_from_mask'
]
