"""
Command-line parsing and dispatch.
"""

import argparse
import logging
from typing import List, Optional

from ..core.ConvexPriorErrors import InvalidArgumentError
from ..core.QuasiConcavity import FIRST_ORDER_GRADIENTS
from ..core.StencilOps import MIXED_STENCILS
from ..oracle.shapes import SHAPE_KINDS
from .config import COMMANDS, DEMO_METHODS, FIELD_FORMATS, build_run_config, get_config
from .logger_config import configure_loggers
from .service import EXIT_ERROR, run_command

logger = logging.getLogger('convex_prior')

EPILOG = (
    "Axis convention: row index is x, column index is y. "
    "Exit codes: 0 success, 1 condition violated, 2 usage or I/O error."
)


def _shared_options() -> argparse.ArgumentParser:
    """Flags every command accepts; None means 'use the configured value'"""
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument('--input', help="input field (.csv or .pgm)")
    shared.add_argument('--output', help="output field or report path")
    shared.add_argument('--outdir', help="output directory for demo")
    shared.add_argument('--format', choices=FIELD_FORMATS, help="format for written fields")
    shared.add_argument('--config', help="config.json to read instead of the project default")
    shared.add_argument('--verbose', action='store_true', help="log at DEBUG level")

    shared.add_argument('--order', type=int, choices=(0, 1, 2), help="condition order for check")
    shared.add_argument('--radius', type=float, help="window radius r")
    shared.add_argument('--tolerance', type=float, help="violation tolerance for check")
    shared.add_argument('--eps-sigmoid', dest='eps_sigmoid', type=float, help="sigmoid temperature of the first-order loss")
    shared.add_argument('--delta', type=float, help="curvature offset for the second-order check and loss")
    shared.add_argument('--eps-grad', dest='eps_grad', type=float, help="smoothing of the gradient magnitude")
    shared.add_argument('--border', type=int, help="excluded frame width")
    shared.add_argument('--mixed-stencil', dest='mixed_stencil', choices=MIXED_STENCILS, help="mixed-derivative stencil; compat is the legacy -u_xy/2 matrix")
    shared.add_argument('--first-order-gradient', dest='first_order_gradient', choices=FIRST_ORDER_GRADIENTS,
                        help="gradient used by the first-order check")

    shared.add_argument('--loss', choices=('1st', '2nd'), help="convexity loss")
    shared.add_argument('--eta', type=float, help="CGPM step size")
    shared.add_argument('--lambda', dest='lam', type=float, help="CGPM convexity weight")
    shared.add_argument('--t-max', dest='t_max', type=int, help="CGPM iterations")
    shared.add_argument('--logit-clamp', dest='logit_clamp', type=float, help="CGPM logit bound")
    shared.add_argument('--compat-no-chain', dest='compat_no_chain', action='store_true',
                        help="apply the mask-space gradient to logits without the sigmoid chain factor")
    shared.add_argument('--no-project', dest='no_project', action='store_true',
                        help="return the descended mask without the final level-set hull projection")
    shared.add_argument('--projection-levels', dest='projection_levels', type=int,
                        help="grey levels of the final CGPM projection")
    shared.add_argument('--logits', action='store_true', help="cgpm input holds logits, not a mask")

    shared.add_argument('--t-max-midpoint', dest='t_max_midpoint', type=int, help="midpoint sweep cap")
    shared.add_argument('--eps-midpoint', dest='eps_midpoint', type=float, help="midpoint convergence threshold")

    shared.add_argument('--gamma-list', dest='gamma_list', help="comma-separated levels, e.g. 0.25,0.5,0.75")
    shared.add_argument('--seed', type=int, help="gradcheck random seed")
    shared.add_argument('--size', type=int, help="gradcheck field size or demo grid size")
    shared.add_argument('--shape', choices=SHAPE_KINDS, help="demo shape")
    shared.add_argument('--method', choices=DEMO_METHODS, help="demo convexification method")
    return shared


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='convex-prior',
        description="Quasi-concavity checks, convexity losses and mask convexification.",
        epilog=EPILOG,
    )
    subparsers = parser.add_subparsers(dest='command', required=True)
    shared = _shared_options()
    descriptions = {
        'check': "check a quasi-concavity condition on a mask",
        'loss': "evaluate a convexity loss and write its per-pixel integrand",
        'gradcheck': "compare analytic and finite-difference loss gradients",
        'convexify0': "midpoint convexification of a mask",
        'cgpm': "convex gradient projection of a mask or logits",
        'demo': "convexify a synthetic shape and write before/after results",
    }
    for name in COMMANDS:
        subparsers.add_parser(name, parents=[shared], help=descriptions[name], epilog=EPILOG)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """
    Parse arguments, run one command and return its exit code.

    Returns:
        int: 0 success, 1 condition violated, 2 usage or I/O error
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        # argparse exits 2 on usage errors and 0 on --help
        return int(e.code or 0)

    if args.verbose:
        logging.getLogger('convex_prior').setLevel(logging.DEBUG)

    config = get_config(args.config)
    configure_loggers(config['io']['logs_directory'])

    try:
        run = build_run_config(args, config)
        return run_command(run)
    except InvalidArgumentError as e:
        logger.error(f"Invalid argument: {str(e)}")
        return EXIT_ERROR
    except OSError as e:
        logger.error(f"I/O error: {str(e)}")
        return EXIT_ERROR
    except Exception:
        logger.exception("Unexpected error while running command")
        return EXIT_ERROR
