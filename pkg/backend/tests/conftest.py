"""
Pytest configuration and fixtures for multiview-blend tests.

Provides:
- Seeded random generators
- Reduced-scale network and training configurations
- A small synthetic multi-view dataset shared by the session
"""

from __future__ import annotations

from typing import TYPE_CHECKING

import numpy as np
import pytest

from config import Settings, TrainConfig, get_settings
from models.dataset import SynthSpec
from models.features import ALL_VIEWS, ViewKind
from models.network import NetworkConfig
from repositories.manifest import load_manifest
from services.synthesis_service import MANIFEST_NAME, synth_dataset

if TYPE_CHECKING:
    from collections.abc import Generator
    from pathlib import Path

    from models.dataset import Manifest

# =============================================================================
# Settings Fixtures
# =============================================================================


@pytest.fixture
def test_settings() -> Settings:
    """Settings with safe defaults."""
    return Settings(log_level="DEBUG", extract_workers=2, eval_batch_size=16)


@pytest.fixture(autouse=True)
def clear_settings_cache() -> Generator[None, None, None]:
    get_settings.cache_clear()
    yield
    get_settings.cache_clear()


# =============================================================================
# Numeric Fixtures
# =============================================================================


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)


@pytest.fixture
def reduced_config() -> NetworkConfig:
    """Three-class reduced network over a spectral and the raw view, no dropout."""
    return NetworkConfig.reduced(3, (ViewKind.MEL, ViewKind.RAW), dropout=0.0)


@pytest.fixture
def train_config() -> TrainConfig:
    """Two short epochs at reduced scale."""
    return TrainConfig(
        epochs=2,
        batch_size=8,
        warmup_epochs=0,
        init_lr=1e-3,
        scale="reduced",
        views=("mel", "raw"),
        dropout=0.0,
        seed=0,
    )


# =============================================================================
# Dataset Fixtures
# =============================================================================

SMALL_SYNTH = SynthSpec(
    n_classes=3,
    views=ALL_VIEWS,
    samples_per_class=6,
    sources_per_class=3,
    duration=1.0,
    sample_rate=8000,
    n_folds=3,
    seed=7,
)


@pytest.fixture(scope="session")
def synth_root(tmp_path_factory: pytest.TempPathFactory) -> Path:
    """Directory holding the small synthetic dataset and its manifest."""
    root = tmp_path_factory.mktemp("synth")
    synth_dataset(SMALL_SYNTH, root)
    return root


@pytest.fixture(scope="session")
def synth_manifest_path(synth_root: Path) -> Path:
    return synth_root / MANIFEST_NAME


@pytest.fixture(scope="session")
def synth_manifest(synth_manifest_path: Path) -> Manifest:
    return load_manifest(synth_manifest_path)
