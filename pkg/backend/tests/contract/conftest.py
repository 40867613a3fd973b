"""
Contract test fixtures.

Generates a small synthetic dataset through the ``synth-data`` subcommand so
every contract test drives the command line the way a user would.
"""

from __future__ import annotations

from typing import TYPE_CHECKING

import pytest

from main import main
from models.dataset import SynthSpec
from services.synthesis_service import MANIFEST_NAME

if TYPE_CHECKING:
    from pathlib import Path

CLI_SYNTH = SynthSpec(
    n_classes=3,
    samples_per_class=6,
    sources_per_class=3,
    duration=1.0,
    sample_rate=8000,
    n_folds=3,
    seed=1,
)

TRAIN_CONFIG = """\
epochs=2
batch_size=8
warmup_epochs=0
init_lr=0.001
scale=reduced
dropout=0.0
views=["mel","raw"]
"""


@pytest.fixture(scope="module")
def dataset_dir(tmp_path_factory: pytest.TempPathFactory) -> Path:
    """Synthetic dataset written by ``synth-data``."""
    root = tmp_path_factory.mktemp("cli")
    spec_path = root / "synth.json"
    spec_path.write_text(CLI_SYNTH.model_dump_json(), encoding="utf-8")
    status = main(["synth-data", "--spec", str(spec_path), "--out", str(root / "data")])
    assert status == 0
    return root / "data"


@pytest.fixture(scope="module")
def manifest_path(dataset_dir: Path) -> Path:
    return dataset_dir / MANIFEST_NAME


@pytest.fixture
def config_path(tmp_path: Path) -> Path:
    """Reduced two-epoch training config file."""
    path = tmp_path / "train.cfg"
    path.write_text(TRAIN_CONFIG, encoding="utf-8")
    return path
