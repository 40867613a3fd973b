"""Fully connected layers and classification heads."""

from __future__ import annotations

from typing import TYPE_CHECKING

import numpy as np

from autodiff import Tensor, ops
from exceptions import ShapeMismatchError
from layers.module import Module, add_batch_axis, as_input, drop_batch_axis, glorot_uniform

if TYPE_CHECKING:
    from collections.abc import Sequence


class Dense(Module):
    def __init__(self, name: str, in_dim: int, out_dim: int, rng: np.random.Generator) -> None:
        super().__init__(name)
        self.in_dim = in_dim
        self.out_dim = out_dim
        self.weight = self.add_parameter(
            "weight", glorot_uniform(rng, (in_dim, out_dim), in_dim, out_dim)
        )
        self.bias = self.add_parameter("bias", np.zeros(out_dim))

    def forward(self, x: Tensor | np.ndarray) -> Tensor:
        x, squeezed = add_batch_axis(as_input(x), 2)
        if x.shape[1] != self.in_dim:
            raise ShapeMismatchError("dense", [x.shape], f"expected width {self.in_dim}")
        y = ops.add(ops.matmul(x, self.weight.tensor()), self.bias.tensor())
        return drop_batch_axis(y, squeezed)


class FCStack(Module):
    """
    Classification head: (dense -> ReLU -> dropout) per hidden width, then a
    dense layer to ``n_classes`` logits. Softmax is left to the loss and to
    inference.
    """

    def __init__(
        self,
        name: str,
        in_dim: int,
        widths: Sequence[int],
        n_classes: int,
        rng: np.random.Generator,
        dropout: float = 0.0,
    ) -> None:
        super().__init__(name)
        self.dropout = dropout
        self.hidden: list[Dense] = []
        width_in = in_dim
        for i, width in enumerate(widths, start=1):
            key = f"fc{i}"
            layer = self.add_child(key, Dense(self.child_name(key), width_in, width, rng))
            self.hidden.append(layer)
            width_in = width
        key = f"fc{len(self.hidden) + 1}"
        self.output = self.add_child(key, Dense(self.child_name(key), width_in, n_classes, rng))

    def forward(
        self,
        x: Tensor | np.ndarray,
        *,
        train: bool = False,
        rng: np.random.Generator | None = None,
    ) -> Tensor:
        y = as_input(x)
        for layer in self.hidden:
            y = ops.dropout(ops.relu(layer(y)), self.dropout, train, rng)
        return self.output(y)
