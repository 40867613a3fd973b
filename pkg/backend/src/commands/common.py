"""
Helpers shared by the subcommands.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import TYPE_CHECKING, NoReturn

from config import get_settings, load_train_config
from exceptions import EXIT_CONFIG_ERROR, ConfigurationError
from models.features import ViewKind
from models.training import TrainMode
from repositories.feature_cache import FeatureCacheRepository
from services.feature_service import FeatureService
from services.training_service import network_config

if TYPE_CHECKING:
    from collections.abc import Sequence

    from config import TrainConfig
    from models.dataset import Manifest

logger = logging.getLogger(__name__)


class CliParser(argparse.ArgumentParser):
    """Argument parser whose usage errors exit with the configuration-error status."""

    def error(self, message: str) -> NoReturn:
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG_ERROR, f"{self.prog}: error: {message}\n")


def parse_views(text: str | Sequence[str]) -> tuple[ViewKind, ...]:
    """
    Parse ``mel,gam,cqt`` (or a sequence of names) into unique views.

    Raises:
        ConfigurationError: On an unknown or repeated view name.
    """
    names = text.split(",") if isinstance(text, str) else list(text)
    views = tuple(ViewKind.parse(n) for n in names if n.strip())
    if not views:
        msg = "no views given"
        raise ConfigurationError(msg)
    if len(set(views)) != len(views):
        msg = f"repeated view in {text!r}"
        raise ConfigurationError(msg)
    return views


def add_config_options(parser: argparse.ArgumentParser) -> None:
    """Training options shared by ``train`` and ``crossval``."""
    parser.add_argument("--manifest", required=True, type=Path, help="Manifest CSV")
    parser.add_argument("--mode", default=None, help="blend | concat | single:<view> | late")
    parser.add_argument("--config", type=Path, default=None, help="key=value training config")
    parser.add_argument("--out", required=True, type=Path, help="Output directory")
    parser.add_argument(
        "--split",
        default="sample_fraction:0.1",
        help="Validation rule: sources_per_class:N, source_fraction:P or sample_fraction:P",
    )
    parser.add_argument("--views", default=None, help="Comma-separated views (multi-view modes)")
    parser.add_argument("--features", type=Path, default=None, help="Feature cache directory")
    parser.add_argument("--epochs", type=int, default=None, help="Override the epoch count")
    parser.add_argument("--seed", type=int, default=None, help="Override the seed")
    parser.add_argument("--scale", choices=("paper", "reduced"), default=None)


def load_run_config(
    args: argparse.Namespace,
) -> tuple[TrainConfig, TrainMode, tuple[ViewKind, ...]]:
    """Training config with command-line overrides, its mode and its view set."""
    views_override = list(parse_views(args.views)) if args.views else None
    cfg = load_train_config(
        args.config,
        mode=args.mode,
        epochs=args.epochs,
        seed=args.seed,
        scale=args.scale,
        views=[v.value for v in views_override] if views_override else None,
    )
    mode = TrainMode.parse(cfg.mode)
    views = (mode.view,) if mode.view is not None else parse_views(cfg.views)
    return cfg, mode, views


def cache_repository(directory: Path | None) -> FeatureCacheRepository | None:
    return FeatureCacheRepository(directory) if directory is not None else None


def feature_service(
    cfg: TrainConfig,
    manifest: Manifest,
    views: tuple[ViewKind, ...],
    manifest_path: Path,
    cache_dir: Path | None = None,
) -> FeatureService:
    """Feature service sized for the network preset the run will build."""
    n_bands = network_config(cfg, manifest.n_classes, views).n_bands
    return FeatureService(
        views,
        n_bands,
        cache=cache_repository(cache_dir),
        root=manifest_path.parent,
        workers=get_settings().extract_workers,
    )
