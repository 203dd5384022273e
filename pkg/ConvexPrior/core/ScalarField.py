"""
Dense 2D scalar fields, integer offset sets and elementwise helpers.

Axis convention: the first index (row, increasing downward) is the x-axis and the
second index (column) is the y-axis. Grid spacing is one pixel.
"""

import logging
from dataclasses import dataclass, field
from typing import List, Tuple, Union

import numpy as np
from scipy.special import expit, logit

from .ConvexPriorErrors import InvalidArgumentError

logger = logging.getLogger('convex_prior')

ArrayLike = Union[np.ndarray, List[List[float]]]

# Mask values are pulled into this interval before taking logits
LOGIT_CLIP = 1e-7


def _frozen_copy(values, dtype) -> np.ndarray:
    data = np.array(values, dtype=dtype, copy=True)
    data.setflags(write=False)
    return data


@dataclass(frozen=True)
class ScalarField:
    """
    H x W grid of real values. Carries either a mask (values in [0,1]) or logits.

    The backing array is a read-only copy; operations return fresh fields.
    """
    data: np.ndarray
    is_mask: bool = False

    def __post_init__(self):
        data = _frozen_copy(self.data, np.float64)
        if data.ndim != 2 or data.shape[0] < 1 or data.shape[1] < 1:
            raise InvalidArgumentError(f"ScalarField needs a non-empty 2D array, got shape {data.shape}")
        if not np.all(np.isfinite(data)):
            raise InvalidArgumentError("ScalarField entries must be finite")
        if self.is_mask and (data.min() < 0.0 or data.max() > 1.0):
            raise InvalidArgumentError(
                f"Mask values must lie in [0,1], got range [{data.min()}, {data.max()}]"
            )
        object.__setattr__(self, 'data', data)

    @classmethod
    def from_array(cls, values: ArrayLike, is_mask: bool = False) -> 'ScalarField':
        return cls(np.asarray(values, dtype=np.float64), is_mask=is_mask)

    @classmethod
    def zeros(cls, height: int, width: int, is_mask: bool = False) -> 'ScalarField':
        return cls(np.zeros((height, width)), is_mask=is_mask)

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def shape(self) -> Tuple[int, int]:
        return self.data.shape

    @property
    def size(self) -> int:
        return self.data.size

    def values(self) -> np.ndarray:
        """Writable copy of the backing array"""
        return np.array(self.data, copy=True)

    def as_mask(self) -> 'ScalarField':
        return ScalarField(self.data, is_mask=True)


@dataclass(frozen=True)
class OffsetSet:
    """Integer offsets d with 0 < ||d|| <= radius, in lexicographic order"""
    radius: float
    offsets: Tuple[Tuple[int, int], ...] = field(default_factory=tuple)

    def __post_init__(self):
        seen = set()
        for d1, d2 in self.offsets:
            norm = (d1 * d1 + d2 * d2) ** 0.5
            if not 0 < norm <= self.radius:
                raise InvalidArgumentError(f"Offset ({d1},{d2}) outside radius {self.radius}")
            if (d1, d2) in seen:
                raise InvalidArgumentError(f"Duplicate offset ({d1},{d2})")
            seen.add((d1, d2))

    def __len__(self) -> int:
        return len(self.offsets)

    def __iter__(self):
        return iter(self.offsets)

    def __contains__(self, item) -> bool:
        return tuple(item) in self.offsets

    @property
    def reach(self) -> int:
        """Largest absolute coordinate of any offset"""
        return max((max(abs(d1), abs(d2)) for d1, d2 in self.offsets), default=0)


@dataclass(frozen=True)
class BinaryMask:
    """{0,1} grid, the binarized super-level set S_gamma"""
    data: np.ndarray

    def __post_init__(self):
        data = np.asarray(self.data)
        if data.ndim != 2:
            raise InvalidArgumentError(f"BinaryMask needs a 2D array, got shape {data.shape}")
        if not np.all((data == 0) | (data == 1)):
            raise InvalidArgumentError("BinaryMask values must be exactly 0 or 1")
        object.__setattr__(self, 'data', _frozen_copy(data, np.uint8))

    @classmethod
    def from_array(cls, values: ArrayLike) -> 'BinaryMask':
        return cls(np.asarray(values).astype(np.uint8))

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def shape(self) -> Tuple[int, int]:
        return self.data.shape

    def area(self) -> int:
        return int(self.data.sum())

    def as_bool(self) -> np.ndarray:
        return self.data.astype(bool)

    def to_field(self) -> ScalarField:
        return ScalarField(self.data.astype(np.float64), is_mask=True)


def make_offsets(r: float) -> OffsetSet:
    """
    Enumerate the integer offsets within radius r.

    Args:
        r: Window radius in pixels (r >= 1)

    Returns:
        OffsetSet: Offsets with 0 < ||d|| <= r in lexicographic order
    """
    if not np.isfinite(r) or r < 1:
        raise InvalidArgumentError(f"Offset radius must be >= 1, got {r}")
    reach = int(np.floor(r))
    offsets = []
    for d1 in range(-reach, reach + 1):
        for d2 in range(-reach, reach + 1):
            # integer comparison avoids sqrt rounding at the rim
            if 0 < d1 * d1 + d2 * d2 <= r * r:
                offsets.append((d1, d2))
    return OffsetSet(radius=float(r), offsets=tuple(offsets))


def _check_same_shape(a: ScalarField, b: ScalarField):
    if a.shape != b.shape:
        raise InvalidArgumentError(f"Shape mismatch: {a.shape} vs {b.shape}")


def linf_distance(a: ScalarField, b: ScalarField) -> float:
    """Max over pixels of |a - b|"""
    _check_same_shape(a, b)
    return float(np.max(np.abs(a.data - b.data)))


def threshold(u: ScalarField, gamma: float) -> BinaryMask:
    """Super-level set S_gamma = {u >= gamma}"""
    return BinaryMask((u.data >= gamma).astype(np.uint8))


def shifted_window(shape: Tuple[int, int], d: Tuple[int, int], scale: int = 1):
    """
    Slices pairing every pixel y with y + scale*d, restricted to pairs inside the grid.

    Returns:
        Tuple of (anchor slices, target slices) usable on arrays of the given shape
    """
    h, w = shape
    s1, s2 = d[0] * scale, d[1] * scale
    rows_y = _span(max(0, -s1), min(h, h - s1))
    cols_y = _span(max(0, -s2), min(w, w - s2))
    rows_t = _span(max(0, s1), min(h, h + s1))
    cols_t = _span(max(0, s2), min(w, w + s2))
    return (rows_y, cols_y), (rows_t, cols_t)


def _span(start: int, stop: int) -> slice:
    return slice(start, max(start, stop))


def interior_mask(shape: Tuple[int, int], border: int) -> np.ndarray:
    """Boolean mask that is False within `border` pixels of the frame"""
    if border < 0:
        raise InvalidArgumentError(f"Border must be >= 0, got {border}")
    mask = np.zeros(shape, dtype=bool)
    h, w = shape
    if 2 * border < h and 2 * border < w:
        mask[border:h - border, border:w - border] = True
    return mask


def sigmoid(values: np.ndarray, eps: float = 1.0) -> np.ndarray:
    """Sigmoid_eps(t) = 1 / (1 + exp(-t/eps))"""
    return expit(np.asarray(values, dtype=np.float64) / eps)


def mask_to_logits(u: ScalarField) -> ScalarField:
    """Recover logits from a mask, clamping u into [1e-7, 1-1e-7] first"""
    clipped = np.clip(u.data, LOGIT_CLIP, 1.0 - LOGIT_CLIP)
    return ScalarField(logit(clipped))
