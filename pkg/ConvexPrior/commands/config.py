"""
Configuration for the command-line surface.

Precedence, lowest first: DEFAULTS, config.json at the project root, CONVEX_PRIOR_<SECTION>_<KEY>
environment variables (a .env file is read through python-dotenv), command-line flags.
"""

import copy
import json
import logging
import os
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

from dotenv import load_dotenv

from ..core.Convexifier import CgpmConfig
from ..core.ConvexityLosses import LossConfig, LossKind
from ..core.ConvexPriorErrors import InvalidArgumentError
from ..core.QuasiConcavity import ConditionConfig

logger = logging.getLogger('convex_prior')

ENV_PREFIX = 'CONVEX_PRIOR_'

COMMANDS = ('check', 'loss', 'gradcheck', 'convexify0', 'cgpm', 'demo')
FILE_COMMANDS = ('check', 'loss', 'convexify0', 'cgpm')
DEMO_METHODS = ('convexify0', 'cgpm-1st', 'cgpm-2nd')
FIELD_FORMATS = ('csv', 'pgm')

MIN_GRADCHECK_SIZE = 6
GRADCHECK_TOLERANCE = 1e-5

DEFAULTS: Dict[str, Dict[str, Any]] = {
    'conditions': {
        'radius': 2.0,
        'tolerance': 1e-9,
        'delta': 0.0,
        'border': 2,
        'eps_g': 1e-8,
        'mixed_stencil': 'composite',
        'gradient': 'central',
    },
    'losses': {
        'radius': 2.0,
        'eps_sigmoid': 0.05,
        'delta': 1e-3,
        'eps_g': 1e-8,
        'border': 2,
        'mixed_stencil': 'composite',
    },
    'cgpm': {
        'eta': 1e-2,
        'lam': 1.0,
        't_max': 100,
        'loss_kind': '2nd',
        'logit_clamp': 16.0,
        'chain_rule': True,
        'project': True,
        'projection_levels': 256,
    },
    'midpoint': {
        'radius': 2.0,
        't_max': 1000,
        'eps': 1e-9,
    },
    'io': {
        'format': 'csv',
        'gammas': [0.25, 0.5, 0.75],
        'logs_directory': 'logs',
        'demo_size': 128,
    },
}


def get_project_root() -> str:
    return os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))


def _merge(base: Dict[str, Dict[str, Any]], overrides: Dict[str, Any], source: str):
    for section, values in overrides.items():
        if section not in base or not isinstance(values, dict):
            logger.warning(f"Ignoring unknown config section '{section}' from {source}")
            continue
        for key, value in values.items():
            if key not in base[section]:
                logger.warning(f"Ignoring unknown config key '{section}.{key}' from {source}")
                continue
            base[section][key] = value


def _cast(raw: str, default: Any) -> Any:
    if isinstance(default, bool):
        return raw.strip().lower() in ('1', 'true', 'yes', 'on')
    if isinstance(default, int):
        return int(raw)
    if isinstance(default, float):
        return float(raw)
    if isinstance(default, list):
        return [float(item) for item in raw.split(',') if item.strip()]
    return raw.strip()


def _env_overrides(environ: Dict[str, str]) -> Dict[str, Dict[str, Any]]:
    overrides: Dict[str, Dict[str, Any]] = {}
    for section, values in DEFAULTS.items():
        for key, default in values.items():
            name = f"{ENV_PREFIX}{section}_{key}".upper()
            if name not in environ:
                continue
            try:
                overrides.setdefault(section, {})[key] = _cast(environ[name], default)
            except ValueError:
                logger.warning(f"Ignoring {name}={environ[name]!r}: not a valid {type(default).__name__}")
    return overrides


def _sanitize(config: Dict[str, Dict[str, Any]]):
    """Pull out-of-range configured values back to safe defaults"""
    for section in ('conditions', 'losses', 'midpoint'):
        if config[section]['radius'] < 1:
            logger.warning(f"{section}.radius {config[section]['radius']} is below 1. Setting to 1.")
            config[section]['radius'] = 1.0
    if config['conditions']['tolerance'] < 0:
        logger.warning(f"conditions.tolerance {config['conditions']['tolerance']} is negative. "
                       f"Setting to {DEFAULTS['conditions']['tolerance']}.")
        config['conditions']['tolerance'] = DEFAULTS['conditions']['tolerance']
    for section in ('conditions', 'losses'):
        if config[section]['delta'] < 0:
            logger.warning(f"{section}.delta is negative. Setting to {DEFAULTS[section]['delta']}.")
            config[section]['delta'] = DEFAULTS[section]['delta']
        if config[section]['eps_g'] <= 0:
            logger.warning(f"{section}.eps_g must be positive. Setting to {DEFAULTS[section]['eps_g']}.")
            config[section]['eps_g'] = DEFAULTS[section]['eps_g']
    if config['losses']['eps_sigmoid'] <= 0:
        logger.warning(f"losses.eps_sigmoid must be positive. Setting to {DEFAULTS['losses']['eps_sigmoid']}.")
        config['losses']['eps_sigmoid'] = DEFAULTS['losses']['eps_sigmoid']
    if config['cgpm']['eta'] <= 0:
        logger.warning(f"cgpm.eta must be positive. Setting to {DEFAULTS['cgpm']['eta']}.")
        config['cgpm']['eta'] = DEFAULTS['cgpm']['eta']
    if config['cgpm']['t_max'] < 1:
        logger.warning(f"cgpm.t_max must be at least 1. Setting to {DEFAULTS['cgpm']['t_max']}.")
        config['cgpm']['t_max'] = DEFAULTS['cgpm']['t_max']
    if config['cgpm']['projection_levels'] < 2:
        logger.warning(f"cgpm.projection_levels must be at least 2. Setting to {DEFAULTS['cgpm']['projection_levels']}.")
        config['cgpm']['projection_levels'] = DEFAULTS['cgpm']['projection_levels']
    if config['midpoint']['t_max'] < 1:
        logger.warning(f"midpoint.t_max must be at least 1. Setting to {DEFAULTS['midpoint']['t_max']}.")
        config['midpoint']['t_max'] = DEFAULTS['midpoint']['t_max']


def get_config(config_path: Optional[str] = None, environ: Optional[Dict[str, str]] = None) -> Dict[str, Dict[str, Any]]:
    """
    Load the layered configuration.

    Args:
        config_path: JSON file to read; defaults to config.json at the project root
        environ: Environment mapping; defaults to os.environ after loading .env

    Returns:
        Dict: Section -> key -> value, every DEFAULTS key present
    """
    config = copy.deepcopy(DEFAULTS)
    if config_path is None:
        config_path = os.path.join(get_project_root(), 'config.json')

    if os.path.exists(config_path):
        try:
            with open(config_path, 'r', encoding='utf-8') as f:
                _merge(config, json.load(f), config_path)
        except (OSError, json.JSONDecodeError) as e:
            logger.error(f"Error loading config {config_path}: {str(e)}")

    if environ is None:
        load_dotenv()
        environ = dict(os.environ)
    _merge(config, _env_overrides(environ), 'environment')

    _sanitize(config)
    return config


@dataclass(frozen=True)
class RunConfig:
    """Everything one command invocation needs, after flags were applied"""
    command: str
    input: Optional[str] = None
    output: Optional[str] = None
    outdir: Optional[str] = None
    fmt: str = 'csv'
    order: int = 2
    seed: int = 0
    size: int = 8
    shape: str = 'star'
    method: str = 'cgpm-2nd'
    gammas: Tuple[float, ...] = (0.25, 0.5, 0.75)
    loss_kind: LossKind = LossKind.SECOND_ORDER
    logits: bool = False
    # the demo scales lambda by the pixel count unless it was given explicitly
    lam_explicit: bool = False
    midpoint_radius: float = 2.0
    midpoint_t_max: int = 1000
    midpoint_eps: float = 1e-9
    condition: ConditionConfig = field(default_factory=ConditionConfig)
    loss: LossConfig = field(default_factory=LossConfig)
    cgpm: CgpmConfig = field(default_factory=CgpmConfig)

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise InvalidArgumentError(f"Unknown command '{self.command}', expected one of {COMMANDS}")
        if self.command in FILE_COMMANDS and not self.input:
            raise InvalidArgumentError(f"Command '{self.command}' needs --input")
        if self.command == 'demo' and not self.outdir:
            raise InvalidArgumentError("Command 'demo' needs --outdir")
        if self.fmt not in FIELD_FORMATS:
            raise InvalidArgumentError(f"Unknown format '{self.fmt}', expected one of {FIELD_FORMATS}")
        if self.order not in (0, 1, 2):
            raise InvalidArgumentError(f"order must be 0, 1 or 2, got {self.order}")
        if self.command == 'gradcheck' and self.size < MIN_GRADCHECK_SIZE:
            raise InvalidArgumentError(f"size must be >= {MIN_GRADCHECK_SIZE} for gradcheck, got {self.size}")
        if self.method not in DEMO_METHODS:
            raise InvalidArgumentError(f"Unknown method '{self.method}', expected one of {DEMO_METHODS}")
        if not self.gammas:
            raise InvalidArgumentError("gamma list must not be empty")
        if int(self.midpoint_t_max) != self.midpoint_t_max or self.midpoint_t_max < 1:
            raise InvalidArgumentError(f"midpoint t_max must be a positive integer, got {self.midpoint_t_max}")
        if not self.midpoint_eps > 0:
            raise InvalidArgumentError(f"midpoint eps must be > 0, got {self.midpoint_eps}")


def parse_gamma_list(raw: str) -> List[float]:
    try:
        gammas = [float(item) for item in raw.split(',') if item.strip()]
    except ValueError:
        raise InvalidArgumentError(f"Invalid gamma list '{raw}'")
    if not gammas:
        raise InvalidArgumentError("gamma list must not be empty")
    return gammas


def build_run_config(args, config: Dict[str, Dict[str, Any]]) -> RunConfig:
    """
    Apply parsed flags on top of the layered configuration. Flags left at None keep the
    configured value; --radius and --delta apply to every concern that has one.
    """
    def pick(flag: str, section: str, key: str):
        value = getattr(args, flag, None)
        return config[section][key] if value is None else value

    condition = ConditionConfig(
        radius=pick('radius', 'conditions', 'radius'),
        tolerance=pick('tolerance', 'conditions', 'tolerance'),
        delta=pick('delta', 'conditions', 'delta'),
        border=pick('border', 'conditions', 'border'),
        eps_g=pick('eps_grad', 'conditions', 'eps_g'),
        mixed_stencil=pick('mixed_stencil', 'conditions', 'mixed_stencil'),
        gradient=pick('first_order_gradient', 'conditions', 'gradient'),
    )
    loss = LossConfig(
        radius=pick('radius', 'losses', 'radius'),
        eps_sigmoid=pick('eps_sigmoid', 'losses', 'eps_sigmoid'),
        delta=pick('delta', 'losses', 'delta'),
        eps_g=pick('eps_grad', 'losses', 'eps_g'),
        border=pick('border', 'losses', 'border'),
        mixed_stencil=pick('mixed_stencil', 'losses', 'mixed_stencil'),
    )
    loss_kind = LossKind.parse(pick('loss', 'cgpm', 'loss_kind'))
    chain_rule = config['cgpm']['chain_rule'] and not getattr(args, 'compat_no_chain', False)
    cgpm = CgpmConfig(
        eta=pick('eta', 'cgpm', 'eta'),
        lam=pick('lam', 'cgpm', 'lam'),
        t_max=pick('t_max', 'cgpm', 't_max'),
        loss_kind=loss_kind,
        loss=loss,
        logit_clamp=pick('logit_clamp', 'cgpm', 'logit_clamp'),
        chain_rule=chain_rule,
        project=config['cgpm']['project'] and not getattr(args, 'no_project', False),
        projection_levels=pick('projection_levels', 'cgpm', 'projection_levels'),
    )
    gamma_flag = getattr(args, 'gamma_list', None)
    gammas = parse_gamma_list(gamma_flag) if gamma_flag else [float(g) for g in config['io']['gammas']]

    size = getattr(args, 'size', None)
    if size is None:
        size = config['io']['demo_size'] if args.command == 'demo' else 8

    return RunConfig(
        command=args.command,
        input=getattr(args, 'input', None),
        output=getattr(args, 'output', None),
        outdir=getattr(args, 'outdir', None),
        fmt=pick('format', 'io', 'format'),
        order=getattr(args, 'order', None) if getattr(args, 'order', None) is not None else 2,
        seed=getattr(args, 'seed', None) or 0,
        size=size,
        shape=getattr(args, 'shape', None) or 'star',
        method=getattr(args, 'method', None) or 'cgpm-2nd',
        gammas=tuple(gammas),
        loss_kind=loss_kind,
        logits=bool(getattr(args, 'logits', False)),
        lam_explicit=getattr(args, 'lam', None) is not None,
        midpoint_radius=pick('radius', 'midpoint', 'radius'),
        midpoint_t_max=pick('t_max_midpoint', 'midpoint', 't_max'),
        midpoint_eps=pick('eps_midpoint', 'midpoint', 'eps'),
        condition=condition,
        loss=loss,
        cgpm=cgpm,
    )
