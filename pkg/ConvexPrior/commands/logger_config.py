"""
Logger configuration for the command-line surface.
"""

import logging
import os
from typing import Optional, Tuple

from .config import get_project_root


def configure_loggers(logs_dir: Optional[str] = None) -> Tuple[logging.Logger, logging.Logger]:
    """
    Configure the package loggers.

    Sets up:
    - Main convex_prior logger (console output through the root handler)
    - Debug logger (file output only, per-iteration detail)

    Args:
        logs_dir: Directory for debug.log; relative paths resolve against the project root

    Returns:
        Tuple of (main_logger, debug_logger)
    """
    main_logger = logging.getLogger('convex_prior')

    debug_logger = logging.getLogger('debug_convex_prior')
    debug_logger.setLevel(logging.DEBUG)

    if logs_dir is None:
        logs_dir = 'logs'
    if not os.path.isabs(logs_dir):
        logs_dir = os.path.join(get_project_root(), logs_dir)
    os.makedirs(logs_dir, exist_ok=True)

    debug_log_path = os.path.abspath(os.path.join(logs_dir, 'debug.log'))
    # repeated calls (one per CLI invocation in tests) must not stack handlers
    for handler in debug_logger.handlers:
        if isinstance(handler, logging.FileHandler) and handler.baseFilename == debug_log_path:
            return main_logger, debug_logger

    debug_handler = logging.FileHandler(debug_log_path, encoding='utf-8')
    debug_handler.setLevel(logging.DEBUG)
    formatter = logging.Formatter('%(asctime)s - %(name)s - %(levelname)s - %(message)s')
    debug_handler.setFormatter(formatter)
    debug_logger.addHandler(debug_handler)

    # Keep iteration detail off the console
    debug_logger.propagate = False

    return main_logger, debug_logger
