"""
Custom exceptions and the CLI error handler.

Every domain error carries a stable ``error_code`` and the process exit
status the command line reports for it.
"""

from __future__ import annotations

import logging
from collections.abc import Sequence

from pydantic import ValidationError

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_DIVERGENCE = 2
EXIT_CONFIG_ERROR = 3


# =============================================================================
# Custom Exceptions
# =============================================================================


class MultiViewError(Exception):
    """Base exception for the multiview-blend application."""

    def __init__(
        self,
        message: str,
        exit_code: int = EXIT_FAILURE,
        error_code: str = "INTERNAL_ERROR",
    ) -> None:
        self.message = message
        self.exit_code = exit_code
        self.error_code = error_code
        super().__init__(message)


class ShapeMismatchError(MultiViewError):
    """Operand shapes are invalid for an operation."""

    def __init__(self, op: str, shapes: Sequence[tuple[int, ...]], detail: str = "") -> None:
        rendered = ", ".join(str(tuple(s)) for s in shapes)
        suffix = f": {detail}" if detail else ""
        super().__init__(
            message=f"{op}: incompatible shapes {rendered}{suffix}",
            error_code="SHAPE_MISMATCH",
        )
        self.op = op
        self.shapes = [tuple(s) for s in shapes]


class InvalidArgumentError(MultiViewError):
    """An argument is outside its valid domain."""

    def __init__(self, message: str) -> None:
        super().__init__(message=message, error_code="INVALID_ARGUMENT")


class AudioFormatError(MultiViewError):
    """Audio file is unreadable or uses an unsupported encoding."""

    def __init__(self, path: str, reason: str) -> None:
        super().__init__(
            message=f"Cannot read audio '{path}': {reason}",
            error_code="AUDIO_FORMAT",
        )
        self.path = path


class SignalTooShortError(MultiViewError):
    """Input is shorter than the window, kernel or segment it must fill."""

    def __init__(self, what: str, length: int, required: int) -> None:
        super().__init__(
            message=f"{what}: length {length} is shorter than required {required}",
            error_code="SIGNAL_TOO_SHORT",
        )
        self.length = length
        self.required = required


class ManifestError(MultiViewError):
    """Dataset manifest is malformed."""

    def __init__(self, message: str) -> None:
        super().__init__(message=message, exit_code=EXIT_CONFIG_ERROR, error_code="MANIFEST")


class SplitError(MultiViewError):
    """A validation split cannot be drawn with the requested rule."""

    def __init__(self, message: str) -> None:
        super().__init__(message=message, exit_code=EXIT_CONFIG_ERROR, error_code="SPLIT")


class ConfigurationError(MultiViewError):
    """Configuration file or command-line options are invalid."""

    def __init__(self, message: str) -> None:
        super().__init__(message=message, exit_code=EXIT_CONFIG_ERROR, error_code="CONFIG")


class DivergenceError(MultiViewError):
    """Training produced a non-finite loss."""

    def __init__(self, step: int, losses: dict[str, float]) -> None:
        rendered = ", ".join(f"{k}={v}" for k, v in losses.items())
        super().__init__(
            message=f"Training diverged at step {step} ({rendered})",
            exit_code=EXIT_DIVERGENCE,
            error_code="DIVERGENCE",
        )
        self.step = step
        self.losses = losses


class NonFiniteGradientError(MultiViewError):
    """An optimizer step received a NaN or infinite gradient."""

    def __init__(self, parameter: str) -> None:
        super().__init__(
            message=f"Non-finite gradient for parameter '{parameter}'",
            exit_code=EXIT_DIVERGENCE,
            error_code="NON_FINITE_GRADIENT",
        )
        self.parameter = parameter


class RepositoryError(MultiViewError):
    """A table file is missing, unreadable or holds invalid rows."""

    def __init__(self, path: object, reason: str) -> None:
        super().__init__(message=f"{path}: {reason}", error_code="REPOSITORY")
        self.path = path


class CheckpointError(MultiViewError):
    """Checkpoint container is corrupt or incompatible."""

    def __init__(self, path: str, reason: str) -> None:
        super().__init__(
            message=f"Invalid checkpoint '{path}': {reason}",
            error_code="CHECKPOINT",
        )
        self.path = path


class MissingCheckpointError(MultiViewError):
    """One or more required checkpoints do not exist."""

    def __init__(self, missing: list[str]) -> None:
        super().__init__(
            message=f"Missing checkpoints: {', '.join(missing)}",
            exit_code=EXIT_CONFIG_ERROR,
            error_code="MISSING_CHECKPOINT",
        )
        self.missing = missing


# =============================================================================
# Exception Handler
# =============================================================================


def handle_cli_error(exc: BaseException, command: str = "") -> int:
    """Log an error raised by a subcommand and return its exit status."""
    if isinstance(exc, MultiViewError):
        logger.warning(
            "Command error: %s - %s (command: %s)",
            exc.error_code,
            exc.message,
            command,
        )
        return exc.exit_code

    if isinstance(exc, ValidationError):
        logger.warning("Validation error in %s: %s", command, exc.errors())
        return EXIT_CONFIG_ERROR

    logger.exception("Unexpected error in %s: %s", command, exc)
    return EXIT_FAILURE
