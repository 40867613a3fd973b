"""
``synth-data``: generate the synthetic multi-view dataset.
"""

from __future__ import annotations

import argparse
import logging
from pathlib import Path

from pydantic import ValidationError

from exceptions import ConfigurationError
from models.dataset import SynthSpec
from services.synthesis_service import synth_dataset

logger = logging.getLogger(__name__)


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser("synth-data", help="Generate a synthetic multi-view dataset")
    parser.add_argument("--spec", type=Path, default=None, help="SynthSpec JSON file")
    parser.add_argument("--out", required=True, type=Path, help="Output directory")
    parser.add_argument("--seed", type=int, default=None, help="Override the dataset seed")
    parser.set_defaults(handler=run)


def load_spec(path: Path | None, seed: int | None = None) -> SynthSpec:
    """
    Read a SynthSpec JSON file (defaults when ``path`` is None).

    Raises:
        ConfigurationError: If the file is missing or invalid.
    """
    try:
        if path is None:
            spec = SynthSpec()
        elif not path.is_file():
            msg = f"Spec file not found: {path}"
            raise ConfigurationError(msg)
        else:
            spec = SynthSpec.model_validate_json(path.read_text(encoding="utf-8"))
    except ValidationError as e:
        msg = f"Invalid synthetic dataset spec: {e.errors(include_url=False)}"
        raise ConfigurationError(msg) from e
    return spec.model_copy(update={"seed": seed}) if seed is not None else spec


def run(args: argparse.Namespace) -> int:
    spec = load_spec(args.spec, args.seed)
    manifest = synth_dataset(spec, args.out)
    print(f"wrote {len(manifest)} clips ({manifest.n_classes} classes) to {args.out}")
    return 0
