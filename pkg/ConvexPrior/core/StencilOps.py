"""
Fixed 3x3 finite-difference stencils and their exact adjoints.

Stencils are applied as sliding correlation (no kernel flip) with zero padding:

    (s * u)(i, j) = sum_{a,b in {-1,0,1}} w[a+1][b+1] * u(i+a, j+b)

Under zero padding the transpose of a correlation is the correlation with the
index-reversed kernel, which is what `apply_adjoint` computes.
"""

import logging
from dataclasses import dataclass
from typing import Dict, Tuple

import numpy as np
from scipy import ndimage

from .ConvexPriorErrors import InvalidArgumentError
from .ScalarField import ScalarField

logger = logging.getLogger('convex_prior')

DEFAULT_EPS_G = 1e-8

MIXED_STENCILS = ('composite', 'compat')


@dataclass(frozen=True)
class Stencil:
    name: str
    weights: np.ndarray

    def __post_init__(self):
        weights = np.array(self.weights, dtype=np.float64, copy=True)
        if weights.shape != (3, 3):
            raise InvalidArgumentError(f"Stencil {self.name} must be 3x3, got {weights.shape}")
        weights.setflags(write=False)
        object.__setattr__(self, 'weights', weights)

    @property
    def flipped(self) -> np.ndarray:
        return self.weights[::-1, ::-1]


DX = Stencil('Dx', [[0, 0, 0], [0, -1, 0], [0, 1, 0]])
DY = Stencil('Dy', [[0, 0, 0], [0, -1, 1], [0, 0, 0]])
DXX = Stencil('Dxx', [[0, 1, 0], [0, -2, 0], [0, 1, 0]])
DYY = Stencil('Dyy', [[0, 0, 0], [1, -2, 1], [0, 0, 0]])
DXY = Stencil('Dxy', 0.5 * np.array([[0, 0, 0], [0, -1, 1], [0, 1, -1]]))
# D_y D_x in the interior; the printed Dxy matrix above is -1/2 of this and has the wrong sign
DXY_COMPOSITE = Stencil('DxyComposite', [[0, 0, 0], [0, 1, -1], [0, -1, 1]])

STENCILS: Dict[str, Stencil] = {
    s.name: s for s in (DX, DY, DXX, DYY, DXY, DXY_COMPOSITE)
}


def mixed_stencil(kind: str = 'composite') -> Stencil:
    """
    Select the mixed-derivative stencil.

    'composite' is D_y D_x, a consistent approximation of u_xy. 'compat' is the
    printed DXY matrix, which equals -u_xy/2 and only reproduces legacy numbers.
    """
    if kind == 'composite':
        return DXY_COMPOSITE
    if kind == 'compat':
        return DXY
    raise InvalidArgumentError(f"Unknown mixed stencil '{kind}', expected one of {MIXED_STENCILS}")


def _correlate(values: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    return ndimage.correlate(values, kernel, mode='constant', cval=0.0)


def apply_array(s: Stencil, values: np.ndarray) -> np.ndarray:
    return _correlate(np.asarray(values, dtype=np.float64), s.weights)


def apply_adjoint_array(s: Stencil, values: np.ndarray) -> np.ndarray:
    return _correlate(np.asarray(values, dtype=np.float64), s.flipped)


def apply(s: Stencil, u: ScalarField) -> ScalarField:
    """Correlate u with the stencil under zero padding"""
    return ScalarField(apply_array(s, u.data))


def apply_adjoint(s: Stencil, v: ScalarField) -> ScalarField:
    """Exact transpose of `apply`: <apply(s,a), b> == <a, apply_adjoint(s,b)>"""
    return ScalarField(apply_adjoint_array(s, v.data))


def gradient(u: ScalarField) -> Tuple[ScalarField, ScalarField]:
    """Forward-difference gradient (Dx u, Dy u)"""
    return apply(DX, u), apply(DY, u)


def smoothed_magnitude_array(ux: np.ndarray, uy: np.ndarray, eps_g: float) -> np.ndarray:
    return np.sqrt(ux * ux + uy * uy + eps_g)


def smoothed_grad_magnitude(u: ScalarField, eps_g: float = DEFAULT_EPS_G) -> ScalarField:
    """Pointwise sqrt(ux^2 + uy^2 + eps_g), strictly positive"""
    if not eps_g > 0:
        raise InvalidArgumentError(f"eps_g must be > 0, got {eps_g}")
    ux, uy = gradient(u)
    return ScalarField(smoothed_magnitude_array(ux.data, uy.data, eps_g))


@dataclass(frozen=True)
class DerivativeFields:
    """The five stencil responses of one field, computed together"""
    ux: np.ndarray
    uy: np.ndarray
    uxx: np.ndarray
    uyy: np.ndarray
    uxy: np.ndarray
    mixed: Stencil

    def q2(self) -> np.ndarray:
        return (self.ux ** 2 * self.uyy
                - 2.0 * self.ux * self.uy * self.uxy
                + self.uy ** 2 * self.uxx)

    def magnitude(self, eps_g: float) -> np.ndarray:
        return smoothed_magnitude_array(self.ux, self.uy, eps_g)


def derivative_fields(u: ScalarField, mixed: str = 'composite') -> DerivativeFields:
    mixed_s = mixed_stencil(mixed)
    return DerivativeFields(
        ux=apply_array(DX, u.data),
        uy=apply_array(DY, u.data),
        uxx=apply_array(DXX, u.data),
        uyy=apply_array(DYY, u.data),
        uxy=apply_array(mixed_s, u.data),
        mixed=mixed_s,
    )
