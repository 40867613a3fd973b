"""Convolution block: conv -> batchnorm -> ReLU -> optional max pooling."""

from __future__ import annotations

from typing import TYPE_CHECKING

import numpy as np

from autodiff import BatchNormState, Tensor, ops, window_geometry
from layers.module import Module, add_batch_axis, as_input, drop_batch_axis, glorot_uniform

if TYPE_CHECKING:
    from models.network import ConvBlockSpec


class ConvBlock(Module):
    """
    One row group of the CRNN tables.

    The convolution has no bias of its own; the batchnorm shift plays that role.
    """

    def __init__(
        self,
        name: str,
        spec: ConvBlockSpec,
        in_channels: int,
        rng: np.random.Generator,
    ) -> None:
        super().__init__(name)
        self.spec = spec
        self.in_channels = in_channels
        kt, kf = spec.kernel
        self.kernel = self.add_parameter(
            "kernel",
            glorot_uniform(
                rng,
                (kt, kf, in_channels, spec.n_filters),
                fan_in=kt * kf * in_channels,
                fan_out=kt * kf * spec.n_filters,
            ),
        )
        self.gamma = self.add_parameter("bn_scale", np.ones(spec.n_filters))
        self.beta = self.add_parameter("bn_shift", np.zeros(spec.n_filters))
        self.running = self.add_state("bn", BatchNormState.create(spec.n_filters))

    def output_shape(self, time: int, freq: int) -> tuple[int, int, int]:
        """(time, freq, channels) after the block, by the VALID/SAME formulas."""
        spec = self.spec
        time, _, _ = window_geometry(time, spec.kernel[0], spec.stride[0], spec.padding)
        freq, _, _ = window_geometry(freq, spec.kernel[1], spec.stride[1], spec.padding)
        if spec.pool_kernel is not None:
            stride = spec.pool_stride or spec.pool_kernel
            time, _, _ = window_geometry(time, spec.pool_kernel[0], stride[0], "VALID")
            freq, _, _ = window_geometry(freq, spec.pool_kernel[1], stride[1], "VALID")
        return time, freq, spec.n_filters

    def forward(
        self,
        x: Tensor | np.ndarray,
        *,
        train: bool = False,
        rng: np.random.Generator | None = None,  # noqa: ARG002
    ) -> Tensor:
        """Map (B, T, F, C) or (T, F, C) to the block output."""
        x, squeezed = add_batch_axis(as_input(x), 4)
        spec = self.spec
        y = ops.conv2d(x, self.kernel.tensor(), spec.stride, spec.padding)
        y = ops.batchnorm(y, self.gamma.tensor(), self.beta.tensor(), self.running, train)
        y = ops.relu(y)
        if spec.pool_kernel is not None:
            y = ops.maxpool2d(y, spec.pool_kernel, spec.pool_stride, "VALID")
        return drop_batch_axis(y, squeezed)
