"""
Unit tests for application settings and training configuration loading.
"""

from __future__ import annotations

from typing import TYPE_CHECKING

import pytest
from pydantic import ValidationError

from config import Settings, TrainConfig, get_settings, load_train_config
from exceptions import ConfigurationError

if TYPE_CHECKING:
    from pathlib import Path


class TestSettings:
    def test_defaults(self, monkeypatch: pytest.MonkeyPatch) -> None:
        monkeypatch.delenv("MVBLEND_LOG_LEVEL", raising=False)
        settings = Settings(_env_file=None)
        assert settings.log_level == "INFO"
        assert settings.extract_workers == 4
        assert settings.eval_batch_size == 64

    def test_environment_prefix(self, monkeypatch: pytest.MonkeyPatch) -> None:
        monkeypatch.setenv("MVBLEND_EXTRACT_WORKERS", "7")
        monkeypatch.setenv("MVBLEND_LOG_LEVEL", "DEBUG")
        settings = get_settings()
        assert settings.extract_workers == 7
        assert settings.log_level == "DEBUG"

    def test_cached(self) -> None:
        assert get_settings() is get_settings()

    def test_bounds(self) -> None:
        with pytest.raises(ValidationError):
            Settings(extract_workers=0)


class TestTrainConfig:
    def test_published_defaults(self) -> None:
        cfg = TrainConfig()
        assert cfg.batch_size == 64
        assert cfg.init_lr == 2e-4
        assert cfg.warmup_lr == 2e-5
        assert cfg.warmup_epochs == 10
        assert cfg.decay_rate == 0.8
        assert cfg.decay_points == (0.1, 0.2, 0.3)
        assert cfg.smoothing_window == 5

    def test_environment_is_ignored(self, monkeypatch: pytest.MonkeyPatch) -> None:
        monkeypatch.setenv("EPOCHS", "7")
        assert TrainConfig().epochs == 3000

    def test_decay_points_validated(self) -> None:
        with pytest.raises(ValidationError, match="decay_points"):
            TrainConfig(decay_points=(0.3, 0.1))
        with pytest.raises(ValidationError, match="decay_points"):
            TrainConfig(decay_points=(0.5, 1.0))

    def test_unknown_field(self) -> None:
        with pytest.raises(ValidationError):
            TrainConfig(learning_rate=0.1)


class TestLoadTrainConfig:
    def test_file_values_and_overrides(self, tmp_path: Path) -> None:
        path = tmp_path / "train.cfg"
        path.write_text('epochs=40\nbatch_size=8\nviews=["mel","raw"]\nmode=concat\n')
        cfg = load_train_config(path, batch_size=16, seed=None)
        assert cfg.epochs == 40
        assert cfg.batch_size == 16
        assert cfg.views == ("mel", "raw")
        assert cfg.mode == "concat"
        assert cfg.seed == 0

    def test_missing_file(self, tmp_path: Path) -> None:
        with pytest.raises(ConfigurationError, match="not found"):
            load_train_config(tmp_path / "absent.cfg")

    def test_invalid_value(self, tmp_path: Path) -> None:
        path = tmp_path / "train.cfg"
        path.write_text("epochs=0\n")
        with pytest.raises(ConfigurationError) as exc_info:
            load_train_config(path)
        assert exc_info.value.exit_code == 3

    def test_no_file(self) -> None:
        assert load_train_config(None, epochs=3).epochs == 3
