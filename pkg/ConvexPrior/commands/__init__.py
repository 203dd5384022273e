"""
Command-line surface: configuration, logging setup, field I/O and the commands.
"""

from .config import DEFAULTS, RunConfig, get_config, build_run_config
from .logger_config import configure_loggers
from .utils import read_field, write_field
from .service import (
    cmd_check,
    cmd_loss,
    cmd_gradcheck,
    cmd_convexify0,
    cmd_cgpm,
    cmd_demo,
    run_command
)
from .commands import build_parser, main

__all__ = [
    'DEFAULTS',
    'RunConfig',
    'get_config',
    'build_run_config',
    'configure_loggers',
    'read_field',
    'write_field',
    'cmd_check',
    'cmd_loss',
    'cmd_gradcheck',
    'cmd_convexify0',
    'cmd_cgpm',
    'cmd_demo',
    'run_command',
    'build_parser',
    'main'
]
