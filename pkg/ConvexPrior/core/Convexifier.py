"""
Convexification procedures: local midpoint repair on masks and the convex
gradient projection module (CGPM), an unrolled proximal descent in logit space
followed by a projection onto fields with convex super-level sets.
"""

import logging
from dataclasses import dataclass, field
from typing import List, Tuple, Union

import numpy as np

from .ConvexityLosses import (
    LossConfig,
    LossKind,
    grad_wrt_logits,
    loss_gradient,
    loss_value,
)
from .ConvexEnvelope import DEFAULT_LEVELS, quasi_concave_envelope
from .ConvexPriorErrors import InvalidArgumentError
from .ScalarField import ScalarField, make_offsets, mask_to_logits, shifted_window, sigmoid

logger = logging.getLogger('convex_prior')
debug_logger = logging.getLogger('debug_convex_prior')

DEFAULT_LOGIT_CLAMP = 16.0
DEFAULT_EARLY_STOP = 0.0


@dataclass(frozen=True)
class CgpmConfig:
    eta: float = 1e-2
    lam: float = 1.0
    t_max: int = 100
    loss_kind: Union[str, LossKind] = LossKind.SECOND_ORDER
    loss: LossConfig = field(default_factory=LossConfig)
    logit_clamp: float = DEFAULT_LOGIT_CLAMP
    # False applies the mask-space gradient straight to the logits
    chain_rule: bool = True
    early_stop: float = DEFAULT_EARLY_STOP
    # hull projection of every grey level after the last step
    project: bool = True
    projection_levels: int = DEFAULT_LEVELS

    def __post_init__(self):
        if not self.eta > 0:
            raise InvalidArgumentError(f"eta must be > 0, got {self.eta}")
        if not self.lam >= 0:
            raise InvalidArgumentError(f"lambda must be >= 0, got {self.lam}")
        if int(self.t_max) != self.t_max or self.t_max < 1:
            raise InvalidArgumentError(f"t_max must be a positive integer, got {self.t_max}")
        if not self.logit_clamp > 0:
            raise InvalidArgumentError(f"logit_clamp must be > 0, got {self.logit_clamp}")
        if not self.early_stop >= 0:
            raise InvalidArgumentError(f"early_stop must be >= 0, got {self.early_stop}")
        if int(self.projection_levels) != self.projection_levels or self.projection_levels < 2:
            raise InvalidArgumentError(f"projection_levels must be an integer >= 2, got {self.projection_levels}")
        object.__setattr__(self, 'loss_kind', LossKind.parse(self.loss_kind))


@dataclass
class ConvexifyTrace:
    iterations: int = 0
    objective_history: List[float] = field(default_factory=list)
    final_linf_step: float = 0.0
    # convexity loss after each CGPM step; stays empty for the midpoint scheme
    loss_history: List[float] = field(default_factory=list)
    # l-inf change made by the final projection, 0 when it is off
    projection_change: float = 0.0


def midpoint_sweep(values: np.ndarray, r: float) -> np.ndarray:
    """
    One Jacobi sweep: every midpoint m = y + d takes the max of its own value and
    min(u(y), u(y + 2d)) over all in-bounds triples, all read from `values`.
    """
    raised = np.array(values, copy=True)
    for d in make_offsets(r):
        (ry, cy), (rz, cz) = shifted_window(values.shape, d, scale=2)
        anchors = values[ry, cy]
        if anchors.size == 0:
            continue
        proposal = np.minimum(anchors, values[rz, cz])
        rows_m = slice(ry.start + d[0], ry.stop + d[0])
        cols_m = slice(cy.start + d[1], cy.stop + d[1])
        np.maximum(raised[rows_m, cols_m], proposal, out=raised[rows_m, cols_m])
    return raised


def midpoint_convexify(u: ScalarField, r: float = 2.0, t_max: int = 1000,
                       eps: float = 1e-9) -> Tuple[ScalarField, ConvexifyTrace]:
    """
    Locally raise midpoints until no sweep changes the field by eps or more.

    Args:
        u: Mask field
        r: Window radius
        t_max: Maximum number of sweeps
        eps: Convergence threshold on the l-inf change of one sweep

    Returns:
        Tuple of (convexified mask, trace); the trace objective is the mean mask value
    """
    if int(t_max) != t_max or t_max < 1:
        raise InvalidArgumentError(f"t_max must be a positive integer, got {t_max}")
    if not eps > 0:
        raise InvalidArgumentError(f"eps must be > 0, got {eps}")
    make_offsets(r)

    current = u.values()
    trace = ConvexifyTrace()
    for sweep in range(int(t_max)):
        raised = midpoint_sweep(current, r)
        change = float(np.max(raised - current))
        current = raised
        trace.iterations += 1
        trace.objective_history.append(float(current.mean()))
        trace.final_linf_step = change
        debug_logger.debug(f"midpoint sweep {sweep + 1}: change={change:.3e} mean={trace.objective_history[-1]:.6f}")
        if change < eps:
            logger.info(f"Midpoint convexification converged after {trace.iterations} sweeps (r={r})")
            break
    else:
        logger.warning(f"Midpoint convexification hit t_max={t_max} with last change {trace.final_linf_step:.3e}")
    return ScalarField(current, is_mask=u.is_mask), trace


def cgpm(o: ScalarField, cfg: CgpmConfig = CgpmConfig()) -> Tuple[ScalarField, ConvexifyTrace]:
    """
    Unrolled proximal descent on 1/2 ||o_t - o||^2 + lambda * L(Sigmoid(o_t)), then a
    hard projection.

    Each step is o_t -= eta * ((o_t - o) + lambda * grad), where grad is the convexity
    gradient chained through the sigmoid (skipped when cfg.chain_rule is False). Logits
    are clamped to +-cfg.logit_clamp after every step. With cfg.project the final mask
    is replaced by its quasi-concave envelope on cfg.projection_levels grey levels, so
    every super-level set of the output is the lattice hull of the descended one.

    Args:
        o: Logit field
        cfg: Solver settings

    Returns:
        Tuple of (final mask, trace)
    """
    if not np.all(np.isfinite(o.data)):
        raise InvalidArgumentError("cgpm needs finite logits")
    anchor = o.data
    current = o.values()
    trace = ConvexifyTrace()
    logger.info(f"CGPM start: loss={cfg.loss_kind.value} eta={cfg.eta} lambda={cfg.lam} t_max={cfg.t_max}")

    for step_index in range(int(cfg.t_max)):
        mask = ScalarField(sigmoid(current), is_mask=True)
        if cfg.lam > 0:
            grad = loss_gradient(cfg.loss_kind, mask, cfg.loss)
            if cfg.chain_rule:
                grad = grad_wrt_logits(grad, mask)
            convexity_term = cfg.lam * grad.data
        else:
            convexity_term = 0.0
        updated = current - cfg.eta * ((current - anchor) + convexity_term)
        np.clip(updated, -cfg.logit_clamp, cfg.logit_clamp, out=updated)

        step = float(np.max(np.abs(updated - current)))
        current = updated
        loss = loss_value(cfg.loss_kind, ScalarField(sigmoid(current), is_mask=True), cfg.loss).value
        objective = 0.5 * float(np.sum((current - anchor) ** 2)) + cfg.lam * loss

        trace.iterations += 1
        trace.objective_history.append(objective)
        trace.loss_history.append(loss)
        trace.final_linf_step = step
        debug_logger.debug(f"cgpm step {step_index + 1}: objective={objective:.6e} loss={loss:.6e} step={step:.3e}")
        if step <= cfg.early_stop:
            logger.info(f"CGPM stopped early after {trace.iterations} steps (step {step:.3e})")
            break

    logger.info(f"CGPM done: {trace.iterations} steps, final objective {trace.objective_history[-1]:.6e}")
    result = ScalarField(sigmoid(current), is_mask=True)
    if cfg.project:
        projected = quasi_concave_envelope(result, cfg.projection_levels)
        trace.projection_change = float(np.max(np.abs(projected.data - result.data)))
        logger.info(f"CGPM projection on {cfg.projection_levels} levels changed the mask by up to {trace.projection_change:.3e}")
        result = projected
    return result, trace


def cgpm_from_mask(u: ScalarField, cfg: CgpmConfig = CgpmConfig()) -> Tuple[ScalarField, ConvexifyTrace]:
    """Run cgpm on the logits of a mask (u clamped into [1e-7, 1-1e-7] first)"""
    return cgpm(mask_to_logits(u), cfg)
