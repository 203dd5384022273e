"""
Definitional quasi-concavity check: walk the segment between every pair of
super-level-set pixels and look for samples that dip below both endpoints.
"""

import logging
from typing import Dict, Sequence

import numpy as np

from ..core.ConvexPriorErrors import InvalidArgumentError
from ..core.QuasiConcavity import EXACT_TOLERANCE, ViolationReport
from ..core.ScalarField import ScalarField

logger = logging.getLogger('convex_prior')
debug_logger = logging.getLogger('debug_convex_prior')

MAX_PAIRS = 10 ** 6
SAMPLINGS = ('round', 'corner')


def pair_stride(count: int, max_pairs: int = MAX_PAIRS) -> int:
    """Smallest stride over the pixel list keeping the pair count within max_pairs"""
    stride = 1
    while True:
        kept = -(-count // stride)
        if kept * (kept - 1) // 2 <= max_pairs:
            return stride
        stride += 1


def _corner_max(values: np.ndarray, px: np.ndarray, py: np.ndarray) -> np.ndarray:
    """Best field value over the lattice corners of the unit cell holding each point"""
    h, w = values.shape
    x0 = np.clip(np.floor(px).astype(np.int64), 0, h - 1)
    y0 = np.clip(np.floor(py).astype(np.int64), 0, w - 1)
    x1 = np.clip(np.ceil(px).astype(np.int64), 0, h - 1)
    y1 = np.clip(np.ceil(py).astype(np.int64), 0, w - 1)
    return np.maximum.reduce([values[x0, y0], values[x0, y1], values[x1, y0], values[x1, y1]])


def _rounded(values: np.ndarray, px: np.ndarray, py: np.ndarray) -> np.ndarray:
    h, w = values.shape
    return values[np.clip(np.rint(px).astype(np.int64), 0, h - 1), np.clip(np.rint(py).astype(np.int64), 0, w - 1)]


_SAMPLERS = {'round': _rounded, 'corner': _corner_max}


def _walk_from(values: np.ndarray, points: np.ndarray, i: int, tol: float, magnitude: np.ndarray,
               sampling: str = 'round') -> int:
    """Walk every segment from points[i] to points[j], j > i; returns the flagged sample count"""
    start = points[i].astype(np.float64)
    ends = points[i + 1:].astype(np.float64)
    if len(ends) == 0:
        return 0
    span = np.max(np.abs(ends - start), axis=1)
    samples = np.ceil(2.0 * span).astype(np.int64) + 1
    longest = int(samples.max())
    # rows past a pair's own sample count repeat its endpoint
    t = np.minimum(np.arange(longest)[None, :] / np.maximum(samples - 1, 1)[:, None], 1.0)
    px = start[0] + t * (ends[:, 0:1] - start[0])
    py = start[1] + t * (ends[:, 1:2] - start[1])

    floor = np.minimum(values[points[i][0], points[i][1]], values[points[i + 1:, 0], points[i + 1:, 1]])
    dip = floor[:, None] - _SAMPLERS[sampling](values, px, py)
    flagged = dip > tol
    if not flagged.any():
        return 0
    rx = np.rint(px[flagged]).astype(np.int64)
    ry = np.rint(py[flagged]).astype(np.int64)
    np.maximum.at(magnitude, (rx, ry), dip[flagged])
    return int(flagged.sum())


def brute_force_quasiconcave(u: ScalarField, gammas: Sequence[float], tol: float = EXACT_TOLERANCE,
                             max_pairs: int = MAX_PAIRS, sampling: str = 'round') -> ViolationReport:
    """
    Exhaustive segment test of the super-level sets of u.

    For every gamma, every pair of pixels with u >= gamma (strided deterministically
    down to at most max_pairs pairs) is joined by ceil(2 ||x-y||_inf) + 1 evenly spaced
    samples. A sample is flagged when its value is below min(u(x), u(y)) - tol; the dip is
    reported at the rounded sample pixel. With sampling='round' a sample reads the pixel
    it rounds to, so a digitized convex set can still dip along its rim. With
    sampling='corner' it reads the best value at the corners of its unit cell, which
    forgives most of that digitization at the cost of missing one-pixel notches.

    Args:
        u: Mask field
        gammas: Levels to binarize at (nonempty)
        tol: Tolerance on the dip
        max_pairs: Pair budget per level
        sampling: 'round' or 'corner'

    Returns:
        ViolationReport: Worst dip per pixel over all levels; per_gamma holds the
        number of distinct flagged pixels at each level
    """
    if len(gammas) == 0:
        raise InvalidArgumentError("brute_force_quasiconcave needs at least one gamma")
    if not tol >= 0:
        raise InvalidArgumentError(f"tol must be >= 0, got {tol}")
    if sampling not in SAMPLINGS:
        raise InvalidArgumentError(f"sampling must be one of {SAMPLINGS}, got '{sampling}'")
    values = u.data
    worst = np.zeros_like(values)
    per_gamma: Dict[float, int] = {}

    for gamma in gammas:
        points = np.argwhere(values >= gamma)
        stride = pair_stride(len(points), max_pairs)
        points = points[::stride]
        magnitude = np.zeros_like(values)
        samples = 0
        for i in range(len(points) - 1):
            samples += _walk_from(values, points, i, tol, magnitude, sampling)
        per_gamma[float(gamma)] = int(np.count_nonzero(magnitude > tol))
        np.maximum(worst, magnitude, out=worst)
        debug_logger.debug(
            f"brute force gamma={gamma} ({sampling}): {len(points)} pixels (stride {stride}), "
            f"{samples} flagged samples, {per_gamma[float(gamma)]} flagged pixels"
        )

    base = ViolationReport.from_magnitude(worst, tol, order=0, radius=None)
    return ViolationReport(
        magnitude=base.magnitude,
        count=base.count,
        max_violation=base.max_violation,
        tolerance=tol,
        order=0,
        radius=None,
        per_gamma=per_gamma,
    )
