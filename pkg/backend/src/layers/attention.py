"""Additive temporal attention pooling over recurrent outputs."""

from __future__ import annotations

import numpy as np

from autodiff import Tensor, ops
from exceptions import ShapeMismatchError
from layers.module import Module, add_batch_axis, as_input, drop_batch_axis, glorot_uniform


class AttentionPool(Module):
    """
    Collapse (B, T, D) to (B, D) with e_t = v . tanh(h_t W + b), alpha = softmax(e).

    The pooled vector is a convex combination of the frames.
    """

    def __init__(
        self, name: str, input_dim: int, attention_dim: int, rng: np.random.Generator
    ) -> None:
        super().__init__(name)
        self.input_dim = input_dim
        self.projection = self.add_parameter(
            "projection",
            glorot_uniform(rng, (input_dim, attention_dim), input_dim, attention_dim),
        )
        self.bias = self.add_parameter("bias", np.zeros(attention_dim))
        self.context = self.add_parameter(
            "context", glorot_uniform(rng, (attention_dim, 1), attention_dim, 1)
        )

    def scores(self, h: Tensor) -> Tensor:
        """Attention weights alpha, shape (B, T)."""
        batch, steps, _ = h.shape
        hidden = ops.tanh(ops.add(ops.matmul(h, self.projection.tensor()), self.bias.tensor()))
        energies = ops.reshape(ops.matmul(hidden, self.context.tensor()), (batch, steps))
        return ops.softmax(energies)

    def forward(self, h: Tensor | np.ndarray) -> Tensor:
        h, squeezed = add_batch_axis(as_input(h), 3)
        if h.shape[2] != self.input_dim:
            raise ShapeMismatchError(
                "attention_pool", [h.shape], f"expected width {self.input_dim}"
            )
        batch, steps, _ = h.shape
        alpha = ops.reshape(self.scores(h), (batch, steps, 1))
        pooled = ops.sum(ops.mul(h, alpha), axis=1)
        return drop_batch_axis(pooled, squeezed)
