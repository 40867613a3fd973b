"""
Subcommands of the ``multiview-blend`` command line.

Each module exposes ``register(subparsers)``, which adds its parser and sets
``handler`` to its ``run(args) -> int`` function.
"""

from __future__ import annotations

from typing import TYPE_CHECKING

from commands import blend_report, crossval, evaluate, extract, synth_data, train
from commands.common import CliParser

if TYPE_CHECKING:
    import argparse

COMMANDS = (synth_data, extract, train, evaluate, crossval, blend_report)


def build_parser() -> CliParser:
    parser = CliParser(
        prog="multiview-blend",
        description="Multi-view audio classification with adaptive gradient blending",
    )
    parser.add_argument("--log-level", default=None, help="Override the configured log level")
    register_all(parser.add_subparsers(dest="command", required=True))
    return parser


def register_all(subparsers: argparse._SubParsersAction) -> None:
    for module in COMMANDS:
        module.register(subparsers)


__all__ = ["COMMANDS", "build_parser", "register_all"]
