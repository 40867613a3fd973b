"""
Learning-rate schedule and the Adam optimizer.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import TYPE_CHECKING

import numpy as np

from exceptions import InvalidArgumentError, NonFiniteGradientError

if TYPE_CHECKING:
    from collections.abc import Mapping, Sequence

    from autodiff import Parameter
    from config import TrainConfig

logger = logging.getLogger(__name__)


def lr_at(epoch: int, cfg: TrainConfig) -> float:
    """
    Learning rate in force during ``epoch`` (1-based).

    ``warmup_lr`` for the first ``warmup_epochs`` epochs, then ``init_lr``
    multiplied by ``decay_rate`` once per decay threshold (``p * E``) that
    ``epoch`` strictly exceeds.
    """
    if epoch < 1:
        msg = f"epochs are 1-based, got {epoch}"
        raise InvalidArgumentError(msg)
    if epoch <= cfg.warmup_epochs:
        return cfg.warmup_lr
    passed = sum(1 for p in cfg.decay_points if epoch > p * cfg.epochs)
    return cfg.init_lr * cfg.decay_rate**passed


@dataclass
class AdamState:
    """First/second moment estimates per parameter name and the step count."""

    step: int = 0
    first: dict[str, np.ndarray] = field(default_factory=dict)
    second: dict[str, np.ndarray] = field(default_factory=dict)

    def to_arrays(self) -> dict[str, np.ndarray]:
        arrays = {"adam/step": np.asarray(self.step)}
        arrays.update({f"adam/m/{k}": v for k, v in self.first.items()})
        arrays.update({f"adam/v/{k}": v for k, v in self.second.items()})
        return arrays

    @classmethod
    def from_arrays(cls, arrays: Mapping[str, np.ndarray]) -> AdamState:
        state = cls(step=int(arrays.get("adam/step", 0)))
        for key, value in arrays.items():
            if key.startswith("adam/m/"):
                state.first[key.removeprefix("adam/m/")] = np.array(value)
            elif key.startswith("adam/v/"):
                state.second[key.removeprefix("adam/v/")] = np.array(value)
        return state


class Adam:
    """Adam with bias correction, updating ``Parameter.value`` in place."""

    def __init__(
        self,
        params: Sequence[Parameter],
        beta1: float = 0.9,
        beta2: float = 0.999,
        eps: float = 1e-8,
    ) -> None:
        names = [p.name for p in params]
        if len(set(names)) != len(names):
            msg = "every parameter must be registered with the optimizer exactly once"
            raise InvalidArgumentError(msg)
        self.params = list(params)
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.state = AdamState()

    def step(self, grads: Mapping[str, np.ndarray], lr: float) -> None:
        """
        Apply one update.

        Raises:
            NonFiniteGradientError: If any gradient holds NaN or inf; no
                parameter is modified in that case.
            InvalidArgumentError: If a gradient's shape differs from its parameter.
        """
        for param in self.params:
            grad = grads.get(param.name)
            if grad is None:
                continue
            if grad.shape != param.shape:
                msg = f"gradient shape {grad.shape} != parameter {param.name} {param.shape}"
                raise InvalidArgumentError(msg)
            if not np.all(np.isfinite(grad)):
                raise NonFiniteGradientError(param.name)

        self.state.step += 1
        t = self.state.step
        correction1 = 1.0 - self.beta1**t
        correction2 = 1.0 - self.beta2**t
        for param in self.params:
            grad = grads.get(param.name)
            if grad is None:
                grad = np.zeros(param.shape)
            m = self.state.first.get(param.name, np.zeros(param.shape))
            v = self.state.second.get(param.name, np.zeros(param.shape))
            m = self.beta1 * m + (1.0 - self.beta1) * grad
            v = self.beta2 * v + (1.0 - self.beta2) * grad * grad
            self.state.first[param.name] = m
            self.state.second[param.name] = v
            update = lr * (m / correction1) / (np.sqrt(v / correction2) + self.eps)
            param.value = param.value - update
        logger.debug("Adam step %d (lr=%g)", t, lr)
