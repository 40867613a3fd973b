"""Tape-based reverse-mode automatic differentiation over numpy arrays."""

from autodiff.ops import BatchNormState, window_geometry
from autodiff.tensor import Gradients, Parameter, Tape, Tensor, active_tape, record

__all__ = [
    "BatchNormState",
    "Gradients",
    "Parameter",
    "Tape",
    "Tensor",
    "active_tape",
    "record",
    "window_geometry",
]
