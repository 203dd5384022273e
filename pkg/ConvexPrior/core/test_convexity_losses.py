import numpy as np
import pytest
from numpy.testing import assert_allclose

from ConvexPrior.core.ConvexityLosses import (
    LossConfig,
    LossKind,
    grad_first_order,
    grad_second_order,
    grad_wrt_logits,
    loss_first_order,
    loss_gradient,
    loss_second_order,
    loss_value,
)
from ConvexPrior.core.ConvexPriorErrors import InvalidArgumentError
from ConvexPrior.core.ScalarField import ScalarField, sigmoid
from ConvexPrior.oracle.gradients import fd_gradient, kink_mask, relative_gradient_error
from ConvexPrior.oracle.shapes import default_shape_spec, make_shape

GRAD_TOLERANCE = 1e-5


def _random_field(seed, size=8):
    return ScalarField(np.random.default_rng(seed).random((size, size)), is_mask=True)


def _assert_gradient_matches(kind, u, cfg):
    analytic = loss_gradient(kind, u, cfg)
    numeric = fd_gradient(kind, u, cfg, step=1e-6)
    excluded = kink_mask(kind, u, cfg)
    assert not excluded.all()
    error = relative_gradient_error(analytic, numeric, excluded)
    assert error <= GRAD_TOLERANCE, error


def test_first_order_gradient_matches_finite_differences():
    cfg = LossConfig()
    for seed in range(20):
        _assert_gradient_matches(LossKind.FIRST_ORDER, _random_field(seed), cfg)


def test_second_order_gradient_matches_finite_differences():
    cfg = LossConfig()
    for seed in range(20):
        _assert_gradient_matches(LossKind.SECOND_ORDER, _random_field(seed), cfg)


def test_gradients_match_with_compat_stencil_and_wider_window():
    _assert_gradient_matches('2nd', _random_field(100), LossConfig(mixed_stencil='compat'))
    _assert_gradient_matches('1st', _random_field(101, size=10), LossConfig(radius=3, border=3))


def test_constant_field_has_zero_gradient():
    u = ScalarField(np.full((8, 8), 0.4), is_mask=True)
    for kind in ('1st', '2nd'):
        assert_allclose(loss_gradient(kind, u).data, 0.0, atol=1e-12)
    # the first-order loss sits on its ReLU kink here, so only the second is differentiable
    assert_allclose(fd_gradient('2nd', u).data, 0.0, atol=1e-8)
    assert loss_first_order(u).value == 0.0


def test_second_order_constant_field_charges_delta():
    u = ScalarField(np.full((8, 8), 0.4), is_mask=True)
    cfg = LossConfig(delta=1e-3, eps_g=1e-8)
    # 4x4 interior, each pixel sqrt(eps_g) * delta, averaged over 64 pixels
    assert_allclose(loss_second_order(u, cfg).value, 16 * 1e-4 * 1e-3 / 64)


def test_losses_are_nonnegative_and_border_free():
    u = _random_field(5, size=12)
    for result in (loss_first_order(u), loss_second_order(u)):
        assert result.value >= 0.0
        assert np.all(result.per_pixel.data >= 0.0)
        assert np.all(result.per_pixel.data[:2, :] == 0.0)
        assert np.all(result.per_pixel.data[:, -2:] == 0.0)
        assert_allclose(result.value, result.per_pixel.data.sum() / u.size)


def test_star_costs_more_than_disk():
    star = make_shape(default_shape_spec('star', 64, 64), 64, 64)
    disk = make_shape(default_shape_spec('disk', 64, 64), 64, 64)
    for kind in ('1st', '2nd'):
        assert loss_value(kind, star).value > loss_value(kind, disk).value


def test_dispatch_matches_direct_calls():
    u = _random_field(9)
    assert loss_value('1st', u).value == loss_first_order(u).value
    assert loss_value(LossKind.SECOND_ORDER, u).value == loss_second_order(u).value
    assert_allclose(loss_gradient('first_order', u).data, grad_first_order(u).data)
    assert_allclose(loss_gradient('2nd', u).data, grad_second_order(u).data)


def test_loss_kind_parse():
    assert LossKind.parse('1st') is LossKind.FIRST_ORDER
    assert LossKind.parse('Second') is LossKind.SECOND_ORDER
    with pytest.raises(InvalidArgumentError):
        LossKind.parse('3rd')


def test_grad_wrt_logits_chain_factor():
    u = ScalarField.from_array([[0.5, 0.1], [0.9, 1.0]], is_mask=True)
    g = ScalarField.from_array([[2.0, 1.0], [1.0, 5.0]])
    assert_allclose(grad_wrt_logits(g, u).data, [[0.5, 0.09], [0.09, 0.0]])
    with pytest.raises(InvalidArgumentError):
        grad_wrt_logits(ScalarField.zeros(3, 3), u)


def test_loss_config_validation():
    with pytest.raises(InvalidArgumentError):
        LossConfig(eps_sigmoid=0.0)
    with pytest.raises(InvalidArgumentError):
        LossConfig(delta=-1.0)
    with pytest.raises(InvalidArgumentError):
        LossConfig(border=-1)


@pytest.mark.parametrize('kind', ['1st', '2nd'])
def test_directional_derivative_matches_gradient(kind):
    rng = np.random.default_rng(21)
    cfg = LossConfig()
    t = 1e-5
    for _ in range(3):
        u = ScalarField(rng.random((10, 10)), is_mask=True)
        v = rng.standard_normal((10, 10))
        upper = loss_value(kind, ScalarField(u.data + t * v), cfg).value
        lower = loss_value(kind, ScalarField(u.data - t * v), cfg).value
        expected = float(np.sum(loss_gradient(kind, u, cfg).data * v))
        assert_allclose((upper - lower) / (2.0 * t), expected, rtol=1e-4, atol=1e-10)


@pytest.mark.parametrize('kind', ['1st', '2nd'])
def test_logit_gradient_matches_finite_differences(kind):
    rng = np.random.default_rng(31)
    cfg = LossConfig()
    o = rng.normal(scale=2.0, size=(8, 8))
    u = ScalarField(sigmoid(o))
    analytic = grad_wrt_logits(loss_gradient(kind, u, cfg), u)
    step = 1e-6
    numeric = np.zeros(o.shape)
    for p in np.ndindex(*o.shape):
        shifted = o.copy()
        shifted[p] += step
        upper = loss_value(kind, ScalarField(sigmoid(shifted)), cfg).value
        shifted[p] -= 2.0 * step
        lower = loss_value(kind, ScalarField(sigmoid(shifted)), cfg).value
        numeric[p] = (upper - lower) / (2.0 * step)
    excluded = kink_mask(kind, u, cfg)
    assert not excluded.all()
    error = relative_gradient_error(analytic, ScalarField(numeric), excluded)
    assert error <= GRAD_TOLERANCE, error


@pytest.mark.parametrize('kind', ['1st', '2nd'])
def test_losses_are_transpose_invariant(kind):
    star = make_shape(default_shape_spec('star', 64, 64), 64, 64)
    rng = np.random.default_rng(41)
    for u in (star, ScalarField(rng.random((12, 15)), is_mask=True)):
        flipped = ScalarField(u.data.T.copy(), is_mask=True)
        assert_allclose(loss_value(kind, flipped).value, loss_value(kind, u).value, rtol=1e-12)
        assert_allclose(loss_gradient(kind, flipped).data, loss_gradient(kind, u).data.T,
                        rtol=1e-9, atol=1e-15)
