import numpy as np
import pytest
from numpy.testing import assert_allclose

from ConvexPrior.core.ConvexPriorErrors import InvalidArgumentError
from ConvexPrior.core.ScalarField import ScalarField
from ConvexPrior.core.StencilOps import (
    DX,
    DXX,
    DXY,
    DXY_COMPOSITE,
    DY,
    DYY,
    STENCILS,
    Stencil,
    apply,
    apply_adjoint,
    derivative_fields,
    gradient,
    mixed_stencil,
    smoothed_grad_magnitude,
)


def _ramp(h=6, w=7, a=2.0, b=-3.0):
    rows, cols = np.mgrid[0:h, 0:w]
    return ScalarField(a * rows + b * cols)


def test_adjoint_identity_for_every_stencil():
    rng = np.random.default_rng(0)
    for _ in range(50):
        a = ScalarField(rng.standard_normal((16, 16)))
        b = ScalarField(rng.standard_normal((16, 16)))
        for stencil in STENCILS.values():
            lhs = float(np.sum(apply(stencil, a).data * b.data))
            rhs = float(np.sum(a.data * apply_adjoint(stencil, b).data))
            assert abs(lhs - rhs) <= 1e-12 * max(1.0, abs(lhs)), stencil.name


def test_forward_differences_on_ramp():
    u = _ramp()
    ux, uy = gradient(u)
    # last row/column read the zero padding
    assert_allclose(ux.data[:-1, :], 2.0)
    assert_allclose(uy.data[:, :-1], -3.0)
    assert_allclose(apply(DXX, u).data[1:-1, :], 0.0, atol=1e-12)
    assert_allclose(apply(DYY, u).data[:, 1:-1], 0.0, atol=1e-12)


def test_second_differences_on_quadratic():
    rows, cols = np.mgrid[0:8, 0:8]
    u = ScalarField(rows ** 2 + 3.0 * cols ** 2)
    assert_allclose(apply(DXX, u).data[1:-1, 1:-1], 2.0)
    assert_allclose(apply(DYY, u).data[1:-1, 1:-1], 6.0)


def test_composite_mixed_stencil_is_dy_of_dx():
    rng = np.random.default_rng(3)
    u = ScalarField(rng.standard_normal((9, 8)))
    composite = apply(DXY_COMPOSITE, u).data
    chained = apply(DY, apply(DX, u)).data
    assert_allclose(composite[:-1, :-1], chained[:-1, :-1], atol=1e-12)


def test_compat_mixed_stencil_is_minus_half_composite():
    assert_allclose(DXY.weights, -0.5 * DXY_COMPOSITE.weights)
    rows, cols = np.mgrid[0:6, 0:6]
    u = ScalarField(rows * cols * 1.0)
    assert_allclose(apply(DXY_COMPOSITE, u).data[:-1, :-1], 1.0)
    assert_allclose(apply(DXY, u).data[:-1, :-1], -0.5)


def test_mixed_stencil_selector():
    assert mixed_stencil() is DXY_COMPOSITE
    assert mixed_stencil('compat') is DXY
    assert mixed_stencil('composite') is DXY_COMPOSITE
    with pytest.raises(InvalidArgumentError):
        mixed_stencil('central')


def test_stencil_must_be_three_by_three():
    with pytest.raises(InvalidArgumentError):
        Stencil('bad', np.zeros((2, 2)))


def test_stencil_weights_are_read_only():
    with pytest.raises(ValueError):
        DX.weights[1, 1] = 3.0


def test_smoothed_magnitude_positive_on_constant():
    u = ScalarField(np.full((5, 5), 0.3))
    g = smoothed_grad_magnitude(u, eps_g=1e-8)
    assert np.all(g.data > 0)
    assert_allclose(g.data[1:-1, 1:-1], 1e-4)
    with pytest.raises(InvalidArgumentError):
        smoothed_grad_magnitude(u, eps_g=0.0)


def test_derivative_fields_q2_of_affine_is_zero():
    fields = derivative_fields(_ramp())
    assert_allclose(fields.q2()[1:-1, 1:-1], 0.0, atol=1e-12)
    assert fields.mixed is DXY_COMPOSITE


def test_printed_dxy_matrix_is_unchanged():
    assert DXY.weights.tolist() == [[0.0, 0.0, 0.0], [0.0, -0.5, 0.5], [0.0, 0.5, -0.5]]


def test_apply_is_linear():
    rng = np.random.default_rng(11)
    a = rng.standard_normal((12, 10))
    b = rng.standard_normal((12, 10))
    for stencil in STENCILS.values():
        combined = apply(stencil, ScalarField(2.5 * a - 0.75 * b)).data
        separate = 2.5 * apply(stencil, ScalarField(a)).data - 0.75 * apply(stencil, ScalarField(b)).data
        assert_allclose(combined, separate, atol=1e-12)


def test_adjoint_of_forward_x_difference_on_impulse():
    impulse = np.zeros((7, 7))
    impulse[3, 4] = 1.0
    out = apply_adjoint(DX, ScalarField(impulse)).data
    expected = np.zeros((7, 7))
    expected[3, 4] = -1.0
    expected[4, 4] = 1.0
    assert_allclose(out, expected)


def test_normal_operator_of_first_difference_is_minus_second_difference():
    rng = np.random.default_rng(12)
    u = ScalarField(rng.standard_normal((11, 9)))
    normal_x = apply_adjoint(DX, apply(DX, u)).data
    normal_y = apply_adjoint(DY, apply(DY, u)).data
    assert_allclose(normal_x[1:-1, :], -apply(DXX, u).data[1:-1, :], atol=1e-12)
    assert_allclose(normal_y[:, 1:-1], -apply(DYY, u).data[:, 1:-1], atol=1e-12)
