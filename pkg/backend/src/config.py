"""
Application and training configuration using pydantic-settings.

``Settings`` is loaded from ``MVBLEND_*`` environment variables (and ``.env``).
``TrainConfig`` is loaded only from a flat ``key=value`` file plus explicit
overrides, so a training run never depends on the caller's environment.
"""

from __future__ import annotations

from functools import lru_cache
from pathlib import Path
from typing import Any, Literal

from pydantic import Field, ValidationError, model_validator
from pydantic_settings import BaseSettings, PydanticBaseSettingsSource, SettingsConfigDict

from exceptions import ConfigurationError


class Settings(BaseSettings):
    """Process-wide settings loaded from environment variables."""

    model_config = SettingsConfigDict(
        env_prefix="MVBLEND_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )

    log_level: Literal["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"] = Field(
        default="INFO",
        description="Logging level",
    )
    feature_cache_dir: Path = Field(
        default=Path(".feature_cache"),
        description="Default output directory of the extract command",
    )
    extract_workers: int = Field(
        default=4,
        description="Thread pool size for feature extraction",
        ge=1,
        le=64,
    )
    eval_batch_size: int = Field(
        default=64,
        description="Segments per forward pass during evaluation",
        ge=1,
        le=1024,
    )


@lru_cache
def get_settings() -> Settings:
    """
    Get cached application settings.

    Returns:
        Settings instance loaded from environment.
    """
    return Settings()


class TrainConfig(BaseSettings):
    """Training hyper-parameters; defaults are the published protocol."""

    model_config = SettingsConfigDict(
        case_sensitive=False,
        extra="forbid",
        frozen=True,
    )

    # ==========================================================================
    # Schedule
    # ==========================================================================
    epochs: int = Field(default=3000, ge=1, description="Number of epochs E")
    batch_size: int = Field(default=64, ge=1, description="Minibatch size")
    init_lr: float = Field(default=2e-4, gt=0.0, description="Learning rate after warm-up")
    warmup_lr: float = Field(default=2e-5, gt=0.0, description="Learning rate during warm-up")
    warmup_epochs: int = Field(default=10, ge=0, description="Warm-up length in epochs")
    decay_rate: float = Field(default=0.8, gt=0.0, le=1.0, description="Staged decay factor")
    decay_points: tuple[float, ...] = Field(
        default=(0.1, 0.2, 0.3),
        description="Fractions of E after which the rate is multiplied by decay_rate",
    )

    # ==========================================================================
    # Blending
    # ==========================================================================
    eval_interval: int = Field(default=1, ge=1, description="Epochs between evaluations")
    eval_interval_steps: int | None = Field(
        default=None,
        ge=1,
        description="Steps between evaluations; overrides eval_interval when set",
    )
    smoothing_window: int = Field(default=5, ge=1, description="Loss smoothing window W")
    weight_floor: float = Field(default=1e-6, gt=0.0, description="Clamp epsilon for G and O")

    # ==========================================================================
    # Run
    # ==========================================================================
    seed: int = Field(default=0, ge=0, description="Seed for every random draw")
    scale: Literal["paper", "reduced"] = Field(default="paper", description="Network preset")
    mode: str = Field(default="blend", description="blend | concat | single:<view> | late")
    views: tuple[str, ...] = Field(
        default=("mel", "gam", "cqt", "raw"),
        description="Views enabled for multi-view modes",
    )
    dropout: float = Field(default=0.1, ge=0.0, lt=1.0, description="Dropout rate")

    @model_validator(mode="after")
    def _check_decay_points(self) -> TrainConfig:
        if any(not 0.0 < p < 1.0 for p in self.decay_points):
            msg = "decay_points must lie strictly between 0 and 1"
            raise ValueError(msg)
        if list(self.decay_points) != sorted(self.decay_points):
            msg = "decay_points must be increasing"
            raise ValueError(msg)
        return self

    @classmethod
    def settings_customise_sources(
        cls,
        settings_cls: type[BaseSettings],
        init_settings: PydanticBaseSettingsSource,
        env_settings: PydanticBaseSettingsSource,
        dotenv_settings: PydanticBaseSettingsSource,
        file_secret_settings: PydanticBaseSettingsSource,
    ) -> tuple[PydanticBaseSettingsSource, ...]:
        # Only explicit values and the config file; the process environment is ignored.
        return init_settings, dotenv_settings


def load_train_config(path: Path | str | None = None, **overrides: Any) -> TrainConfig:
    """
    Load a training configuration file.

    The file is flat ``key=value`` text, one TrainConfig field per line; tuple
    fields take JSON arrays (``views=["mel","raw"]``). Explicit overrides win.

    Raises:
        ConfigurationError: If the file is missing or a value is invalid.
    """
    kwargs = {k: v for k, v in overrides.items() if v is not None}
    if path is not None:
        config_path = Path(path)
        if not config_path.is_file():
            msg = f"Config file not found: {config_path}"
            raise ConfigurationError(msg)
        kwargs["_env_file"] = config_path
    try:
        return TrainConfig(**kwargs)
    except ValidationError as e:
        msg = f"Invalid training config: {e.errors(include_url=False)}"
        raise ConfigurationError(msg) from e
