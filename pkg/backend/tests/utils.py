"""
Test utilities for multiview-blend tests.

Provides finite-difference gradient checks and small WAV writers.
"""

from __future__ import annotations

from typing import TYPE_CHECKING

import numpy as np

from autodiff import Tape
from dsp import save_wav
from models.features import Waveform

if TYPE_CHECKING:
    from collections.abc import Callable, Sequence
    from pathlib import Path

    from autodiff import Parameter, Tensor

FD_STEP = 1e-6


def relative_error(analytic: np.ndarray, numeric: np.ndarray) -> float:
    """||a - n|| / (||a|| + ||n||), zero when both vanish."""
    scale = np.linalg.norm(analytic) + np.linalg.norm(numeric)
    if scale < 1e-12:
        return 0.0
    return float(np.linalg.norm(analytic - numeric) / scale)


def numeric_gradient(
    fn: Callable[[np.ndarray], float],
    x: np.ndarray,
    indices: Sequence[tuple[int, ...]] | None = None,
    step: float = FD_STEP,
) -> np.ndarray:
    """Central differences of a scalar function at ``indices`` (every entry by default)."""
    grad = np.zeros_like(x)
    positions = indices if indices is not None else list(np.ndindex(x.shape))
    for idx in positions:
        original = x[idx]
        x[idx] = original + step
        upper = fn(x)
        x[idx] = original - step
        lower = fn(x)
        x[idx] = original
        grad[idx] = (upper - lower) / (2.0 * step)
    return grad


def sample_indices(
    shape: tuple[int, ...], count: int, rng: np.random.Generator
) -> list[tuple[int, ...]]:
    flat = rng.choice(int(np.prod(shape)), size=min(count, int(np.prod(shape))), replace=False)
    return [tuple(int(i) for i in np.unravel_index(f, shape)) for f in flat]


def check_parameter_gradients(
    loss_fn: Callable[[], Tensor],
    params: Sequence[Parameter],
    rng: np.random.Generator,
    samples: int = 50,
) -> float:
    """
    Worst relative error between tape gradients and central differences.

    ``loss_fn`` must build its graph from ``Parameter.tensor()`` so the
    parameters lift onto the active tape. ``samples`` entries are checked in
    total, spread over the parameters.
    """
    with Tape() as tape:
        loss = loss_fn()
    grads = tape.backward(loss).for_parameters(params)

    def evaluate() -> float:
        return float(loss_fn().data)

    per_param = max(1, -(-samples // len(params)))
    worst = 0.0
    for param in params:
        indices = sample_indices(param.shape, per_param, rng)
        numeric = numeric_gradient(lambda _: evaluate(), param.value, indices)
        analytic = np.array([grads[param.name][i] for i in indices])
        worst = max(worst, relative_error(analytic, np.array([numeric[i] for i in indices])))
    return worst


def write_tone(
    path: Path,
    freq: float,
    duration: float,
    sample_rate: int,
    amplitude: float = 0.5,
) -> Path:
    t = np.arange(round(duration * sample_rate)) / sample_rate
    samples = amplitude * np.sin(2 * np.pi * freq * t)
    save_wav(path, Waveform(samples=samples, sample_rate=sample_rate))
    return path
