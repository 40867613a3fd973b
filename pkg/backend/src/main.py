"""
Command-line entry point.

Configures logging from settings and dispatches to the subcommand handlers.
Exit status: 0 success, 1 failure, 2 training divergence, 3 configuration
or usage error.
"""

from __future__ import annotations

import logging
import sys
from typing import TYPE_CHECKING

from commands import build_parser
from config import get_settings
from exceptions import EXIT_OK, handle_cli_error

if TYPE_CHECKING:
    from collections.abc import Sequence

logger = logging.getLogger(__name__)

PACKAGE_LOGGERS = (
    "autodiff",
    "dsp",
    "layers",
    "networks",
    "services",
    "repositories",
    "commands",
)


def _configure_logging(log_level: str) -> None:
    """Configure application logging level from settings."""
    level = getattr(logging, log_level.upper(), logging.INFO)

    root_logger = logging.getLogger()
    if not root_logger.handlers:
        logging.basicConfig(
            level=level,
            format="%(asctime)s %(levelname)s %(name)s %(message)s",
        )
    else:
        root_logger.setLevel(level)

    for logger_name in PACKAGE_LOGGERS:
        logging.getLogger(logger_name).setLevel(level)

    # scipy and numpy warnings stay at WARNING+ regardless of app log level.
    for logger_name in ("scipy", "numpy"):
        logging.getLogger(logger_name).setLevel(logging.WARNING)


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _configure_logging(args.log_level or get_settings().log_level)

    try:
        status = args.handler(args)
    except Exception as e:
        return handle_cli_error(e, args.command)
    return EXIT_OK if status is None else status


if __name__ == "__main__":
    sys.exit(main())
