import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from ConvexPrior.core.ConvexPriorErrors import InvalidArgumentError
from ConvexPrior.core.ScalarField import (
    BinaryMask,
    OffsetSet,
    ScalarField,
    interior_mask,
    linf_distance,
    make_offsets,
    mask_to_logits,
    shifted_window,
    sigmoid,
    threshold,
)


def test_make_offsets_radius_one():
    """r=1 gives the four axis neighbours"""
    offsets = make_offsets(1)
    assert len(offsets) == 4
    assert set(offsets) == {(-1, 0), (0, -1), (0, 1), (1, 0)}


def test_make_offsets_radius_sqrt2_and_two():
    assert len(make_offsets(np.sqrt(2))) == 8
    offsets = make_offsets(2)
    assert len(offsets) == 12
    assert (2, 0) in offsets
    assert (1, 1) in offsets
    assert (2, 1) not in offsets


def test_make_offsets_lexicographic_and_symmetric():
    offsets = list(make_offsets(3))
    assert offsets == sorted(offsets)
    assert (0, 0) not in offsets
    for d1, d2 in offsets:
        assert (-d1, -d2) in offsets


def test_make_offsets_rejects_small_radius():
    with pytest.raises(InvalidArgumentError):
        make_offsets(0.5)


def test_offset_set_rejects_out_of_radius():
    with pytest.raises(InvalidArgumentError):
        OffsetSet(radius=1.0, offsets=((2, 0),))
    with pytest.raises(InvalidArgumentError):
        OffsetSet(radius=2.0, offsets=((1, 0), (1, 0)))


def test_scalar_field_validation():
    with pytest.raises(InvalidArgumentError):
        ScalarField(np.zeros(5))
    with pytest.raises(InvalidArgumentError):
        ScalarField(np.array([[0.0, np.nan]]))
    with pytest.raises(InvalidArgumentError):
        ScalarField(np.array([[0.0, 1.5]]), is_mask=True)
    u = ScalarField.from_array([[0.0, 0.5], [1.0, 0.25]], is_mask=True)
    assert u.shape == (2, 2)
    assert u.size == 4


def test_scalar_field_is_immutable_copy():
    raw = np.zeros((3, 3))
    u = ScalarField(raw)
    raw[0, 0] = 5.0
    assert u.data[0, 0] == 0.0
    with pytest.raises(ValueError):
        u.data[0, 0] = 1.0
    copy = u.values()
    copy[0, 0] = 2.0
    assert u.data[0, 0] == 0.0


def test_threshold_is_weak_superlevel_set():
    u = ScalarField.from_array([[0.2, 0.5], [0.7, 0.49]], is_mask=True)
    assert_array_equal(threshold(u, 0.5).data, [[0, 1], [1, 0]])
    assert threshold(u, 0.5).area() == 2


def test_binary_mask_rejects_non_binary():
    with pytest.raises(InvalidArgumentError):
        BinaryMask(np.array([[0, 2]]))


def test_linf_distance():
    a = ScalarField.zeros(2, 3)
    b = ScalarField.from_array([[0, 0, -0.5], [0.25, 0, 0]])
    assert linf_distance(a, b) == 0.5
    with pytest.raises(InvalidArgumentError):
        linf_distance(a, ScalarField.zeros(3, 2))


def test_shifted_window_pairs_stay_in_bounds():
    shape = (5, 4)
    (ry, cy), (rt, ct) = shifted_window(shape, (1, -2))
    grid = np.arange(20).reshape(shape)
    anchors = grid[ry, cy]
    targets = grid[rt, ct]
    assert anchors.shape == targets.shape == (4, 2)
    # target is one row down and two columns left of its anchor
    assert_array_equal(targets, anchors + 4 - 2)


def test_shifted_window_empty_when_offset_exceeds_grid():
    (ry, cy), _ = shifted_window((3, 3), (2, 0), scale=2)
    assert np.zeros((3, 3))[ry, cy].size == 0


def test_interior_mask():
    mask = interior_mask((6, 5), 2)
    assert mask.sum() == 2
    assert not interior_mask((4, 4), 2).any()


def test_sigmoid_and_logits_round_trip():
    assert_allclose(sigmoid(np.array([0.0])), [0.5])
    assert_allclose(sigmoid(np.array([0.05]), eps=0.05), [1.0 / (1.0 + np.exp(-1.0))])
    u = ScalarField.from_array([[0.0, 0.3], [0.9, 1.0]], is_mask=True)
    logits = mask_to_logits(u)
    assert np.all(np.isfinite(logits.data))
    assert_allclose(sigmoid(logits.data)[0, 1], 0.3, rtol=1e-12)
    assert_allclose(sigmoid(logits.data)[0, 0], 1e-7, rtol=1e-6)
