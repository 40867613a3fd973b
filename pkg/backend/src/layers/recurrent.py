"""
Gated recurrent layers.

    z_t = sigmoid(x_t Wz + h_{t-1} Uz + bz)
    r_t = sigmoid(x_t Wr + h_{t-1} Ur + br)
    c_t = tanh(x_t Wc + (r_t * h_{t-1}) Uc + bc)
    h_t = (1 - z_t) * h_{t-1} + z_t * c_t

Input projections for every step are computed in one matmul; only the
recurrent products run inside the time loop.
"""

from __future__ import annotations

import numpy as np

from autodiff import Tensor, ops
from exceptions import ShapeMismatchError
from layers.module import Module, add_batch_axis, as_input, drop_batch_axis, glorot_uniform

_GATES = 3


class GRU(Module):
    """Unidirectional GRU over (B, T, D) returning every hidden state (B, T, H)."""

    def __init__(
        self,
        name: str,
        input_dim: int,
        hidden: int,
        rng: np.random.Generator,
        *,
        reverse: bool = False,
    ) -> None:
        super().__init__(name)
        self.input_dim = input_dim
        self.hidden = hidden
        self.reverse = reverse
        self.kernel = self.add_parameter(
            "kernel",
            np.concatenate(
                [
                    glorot_uniform(rng, (input_dim, hidden), input_dim, hidden)
                    for _ in range(_GATES)
                ],
                axis=1,
            ),
        )
        self.recurrent = self.add_parameter(
            "recurrent_kernel",
            np.concatenate(
                [glorot_uniform(rng, (hidden, hidden), hidden, hidden) for _ in range(_GATES)],
                axis=1,
            ),
        )
        self.bias = self.add_parameter("bias", np.zeros(_GATES * hidden))

    def forward(self, x: Tensor | np.ndarray) -> Tensor:
        x, squeezed = add_batch_axis(as_input(x), 3)
        if x.shape[2] != self.input_dim:
            raise ShapeMismatchError(
                "gru", [x.shape], f"expected feature width {self.input_dim}"
            )
        batch, steps, _ = x.shape
        h = self.hidden
        every = slice(None)
        gates_zr, gate_c = slice(0, 2 * h), slice(2 * h, 3 * h)

        projected = ops.add(ops.matmul(x, self.kernel.tensor()), self.bias.tensor())
        recurrent = self.recurrent.tensor()
        u_zr = ops.getitem(recurrent, (every, gates_zr))
        u_c = ops.getitem(recurrent, (every, gate_c))

        state = Tensor(np.zeros((batch, h)))
        outputs: list[Tensor | None] = [None] * steps
        order = range(steps - 1, -1, -1) if self.reverse else range(steps)
        for t in order:
            x_t = ops.getitem(projected, (every, t))
            zr = ops.sigmoid(ops.add(ops.getitem(x_t, (every, gates_zr)), ops.matmul(state, u_zr)))
            z = ops.getitem(zr, (every, slice(0, h)))
            r = ops.getitem(zr, (every, slice(h, 2 * h)))
            candidate = ops.tanh(
                ops.add(ops.getitem(x_t, (every, gate_c)), ops.matmul(ops.mul(r, state), u_c))
            )
            state = ops.add(state, ops.mul(z, ops.sub(candidate, state)))
            outputs[t] = state
        return drop_batch_axis(ops.stack(outputs, axis=1), squeezed)


class BiGRU(Module):
    """Forward and backward GRUs with outputs concatenated per step: (T, D) -> (T, 2H)."""

    def __init__(self, name: str, input_dim: int, hidden: int, rng: np.random.Generator) -> None:
        super().__init__(name)
        self.hidden = hidden
        self.forward_cell = self.add_child(
            "forward", GRU(self.child_name("forward"), input_dim, hidden, rng)
        )
        self.backward_cell = self.add_child(
            "backward", GRU(self.child_name("backward"), input_dim, hidden, rng, reverse=True)
        )

    @property
    def output_dim(self) -> int:
        return 2 * self.hidden

    def forward(self, x: Tensor | np.ndarray) -> Tensor:
        x = as_input(x)
        return ops.concat([self.forward_cell(x), self.backward_cell(x)], axis=-1)
