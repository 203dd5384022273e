import logging

import numpy as np
from scipy import ndimage

from ..core.ConvexPriorErrors import InvalidArgumentError
from ..core.ScalarField import BinaryMask

logger = logging.getLogger('convex_prior')

# 8-connectivity
_CONNECTIVITY = np.ones((3, 3), dtype=bool)


def dice(a: BinaryMask, b: BinaryMask) -> float:
    """2|A & B| / (|A| + |B|); two empty masks agree perfectly"""
    if a.shape != b.shape:
        raise InvalidArgumentError(f"Shape mismatch: {a.shape} vs {b.shape}")
    total = a.area() + b.area()
    if total == 0:
        return 1.0
    overlap = int(np.count_nonzero(a.as_bool() & b.as_bool()))
    return 2.0 * overlap / total


def count_components(mask: BinaryMask) -> int:
    """Number of 8-connected foreground components"""
    _, count = ndimage.label(mask.as_bool(), structure=_CONNECTIVITY)
    return int(count)
