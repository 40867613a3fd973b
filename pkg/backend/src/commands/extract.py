"""
``extract``: write the feature cache for every clip of a manifest.
"""

from __future__ import annotations

import argparse
import logging
from pathlib import Path

from commands.common import parse_views
from config import get_settings
from repositories.feature_cache import FeatureCacheRepository
from repositories.manifest import load_manifest
from services.feature_service import FeatureService

logger = logging.getLogger(__name__)


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser("extract", help="Extract view features into a cache")
    parser.add_argument("--manifest", required=True, type=Path, help="Manifest CSV")
    parser.add_argument("--views", default="mel,gam,cqt", help="Comma-separated views")
    parser.add_argument("--out", type=Path, default=None, help="Cache directory")
    parser.add_argument("--n-bands", type=int, default=64, help="Bands per spectral view")
    parser.add_argument("--workers", type=int, default=None, help="Concurrent extractions")
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace) -> int:
    settings = get_settings()
    views = parse_views(args.views)
    manifest = load_manifest(args.manifest)
    out = args.out or settings.feature_cache_dir
    service = FeatureService(
        views,
        args.n_bands,
        cache=FeatureCacheRepository(out),
        root=args.manifest.parent,
        workers=args.workers or settings.extract_workers,
    )
    written = service.write_cache(manifest.records)
    print(f"cached {len(written)} feature records for {len(manifest)} clips under {out}")
    return 0
