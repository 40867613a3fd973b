"""
Differentiable primitives.

Every function takes and returns ``Tensor`` objects, validates operand
shapes, and routes through ``record`` so the result lands on the inputs'
tape. Spatial operations use the (batch, time, freq, channels) layout.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import Literal

import numpy as np
from scipy.special import expit

from autodiff.tensor import Tensor, as_tensor, record
from exceptions import InvalidArgumentError, ShapeMismatchError

Padding = Literal["SAME", "VALID"]
_PADDINGS = ("SAME", "VALID")


def _unbroadcast(grad: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    """Sum a broadcast gradient back down to ``shape``."""
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, extent in enumerate(shape):
        if extent == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


def _broadcast_shape(op: str, a: Tensor, b: Tensor) -> tuple[int, ...]:
    try:
        return np.broadcast_shapes(a.shape, b.shape)
    except ValueError as e:
        raise ShapeMismatchError(op, [a.shape, b.shape]) from e


# =============================================================================
# Elementwise arithmetic
# =============================================================================


def add(a: Tensor | float, b: Tensor | float) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _broadcast_shape("add", a, b)

    def forward(x: np.ndarray, y: np.ndarray):
        def backward(g: np.ndarray):
            return _unbroadcast(g, x.shape), _unbroadcast(g, y.shape)

        return x + y, backward

    return record("add", [a, b], forward)


def sub(a: Tensor | float, b: Tensor | float) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _broadcast_shape("sub", a, b)

    def forward(x: np.ndarray, y: np.ndarray):
        def backward(g: np.ndarray):
            return _unbroadcast(g, x.shape), _unbroadcast(-g, y.shape)

        return x - y, backward

    return record("sub", [a, b], forward)


def mul(a: Tensor | float, b: Tensor | float) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _broadcast_shape("mul", a, b)

    def forward(x: np.ndarray, y: np.ndarray):
        def backward(g: np.ndarray):
            return _unbroadcast(g * y, x.shape), _unbroadcast(g * x, y.shape)

        return x * y, backward

    return record("mul", [a, b], forward)


def neg(a: Tensor) -> Tensor:
    return scale(a, -1.0)


def scale(a: Tensor, factor: float) -> Tensor:
    """Multiply by a constant."""

    def forward(x: np.ndarray):
        return x * factor, lambda g: (g * factor,)

    return record("scale", [a], forward)


def matmul(a: Tensor, b: Tensor) -> Tensor:
    """Batched matrix product over the last two axes."""
    if a.ndim < 2 or b.ndim < 2 or a.shape[-1] != b.shape[-2]:
        raise ShapeMismatchError("matmul", [a.shape, b.shape], "inner dimensions differ")
    try:
        np.broadcast_shapes(a.shape[:-2], b.shape[:-2])
    except ValueError as e:
        raise ShapeMismatchError("matmul", [a.shape, b.shape], "batch axes differ") from e

    def forward(x: np.ndarray, y: np.ndarray):
        def backward(g: np.ndarray):
            gx = g @ np.swapaxes(y, -1, -2)
            gy = np.swapaxes(x, -1, -2) @ g
            return _unbroadcast(gx, x.shape), _unbroadcast(gy, y.shape)

        return x @ y, backward

    return record("matmul", [a, b], forward)


# =============================================================================
# Nonlinearities
# =============================================================================


def relu(a: Tensor) -> Tensor:
    def forward(x: np.ndarray):
        mask = x > 0
        return np.where(mask, x, 0.0), lambda g: (g * mask,)

    return record("relu", [a], forward)


def sigmoid(a: Tensor) -> Tensor:
    def forward(x: np.ndarray):
        out = expit(x)
        return out, lambda g: (g * out * (1.0 - out),)

    return record("sigmoid", [a], forward)


def tanh(a: Tensor) -> Tensor:
    def forward(x: np.ndarray):
        out = np.tanh(x)
        return out, lambda g: (g * (1.0 - out * out),)

    return record("tanh", [a], forward)


def exp(a: Tensor) -> Tensor:
    def forward(x: np.ndarray):
        out = np.exp(x)
        return out, lambda g: (g * out,)

    return record("exp", [a], forward)


def log(a: Tensor) -> Tensor:
    def forward(x: np.ndarray):
        return np.log(x), lambda g: (g / x,)

    return record("log", [a], forward)


def softmax(a: Tensor) -> Tensor:
    """Softmax over the last axis."""

    def forward(x: np.ndarray):
        shifted = np.exp(x - x.max(axis=-1, keepdims=True))
        out = shifted / shifted.sum(axis=-1, keepdims=True)

        def backward(g: np.ndarray):
            return (out * (g - (g * out).sum(axis=-1, keepdims=True)),)

        return out, backward

    return record("softmax", [a], forward)


def softmax_cross_entropy(logits: Tensor, targets: Tensor) -> Tensor:
    """Mean over rows of -sum(y * log softmax(logits)); targets are not differentiated."""
    if logits.shape != targets.shape or logits.ndim != 2:
        raise ShapeMismatchError("softmax_cross_entropy", [logits.shape, targets.shape])

    def forward(x: np.ndarray, y: np.ndarray):
        shifted = x - x.max(axis=-1, keepdims=True)
        log_z = np.log(np.exp(shifted).sum(axis=-1, keepdims=True))
        log_p = shifted - log_z
        rows = x.shape[0]
        loss = -(y * log_p).sum() / rows

        def backward(g: np.ndarray):
            return g * (np.exp(log_p) - y) / rows, None

        return np.asarray(loss), backward

    return record("softmax_cross_entropy", [logits, targets], forward)


# =============================================================================
# Reductions and shape manipulation
# =============================================================================


def _normalize_axes(axis: int | Sequence[int] | None, ndim: int) -> tuple[int, ...]:
    if axis is None:
        return tuple(range(ndim))
    axes = (axis,) if isinstance(axis, int) else tuple(axis)
    for ax in axes:
        if not -ndim <= ax < ndim:
            msg = f"axis {ax} out of range for rank {ndim}"
            raise InvalidArgumentError(msg)
    return tuple(sorted(ax % ndim for ax in axes))


def sum(  # noqa: A001
    a: Tensor, axis: int | Sequence[int] | None = None, keepdims: bool = False
) -> Tensor:
    axes = _normalize_axes(axis, a.ndim)

    def forward(x: np.ndarray):
        def backward(g: np.ndarray):
            expanded = g if keepdims else np.expand_dims(g, axes)
            return (np.broadcast_to(expanded, x.shape).copy(),)

        return x.sum(axis=axes, keepdims=keepdims), backward

    return record("sum", [a], forward)


def mean(a: Tensor, axis: int | Sequence[int] | None = None, keepdims: bool = False) -> Tensor:
    axes = _normalize_axes(axis, a.ndim)
    count = math.prod(a.shape[ax] for ax in axes)

    def forward(x: np.ndarray):
        def backward(g: np.ndarray):
            expanded = g if keepdims else np.expand_dims(g, axes)
            return (np.broadcast_to(expanded / count, x.shape).copy(),)

        return x.mean(axis=axes, keepdims=keepdims), backward

    return record("mean", [a], forward)


def reshape(a: Tensor, shape: Sequence[int]) -> Tensor:
    target = tuple(shape)
    known = math.prod(s for s in target if s != -1)
    if -1 in target:
        valid = target.count(-1) == 1 and known > 0 and a.size % known == 0
    else:
        valid = known == a.size
    if not valid:
        raise ShapeMismatchError("reshape", [a.shape, target])

    def forward(x: np.ndarray):
        return x.reshape(target), lambda g: (g.reshape(x.shape),)

    return record("reshape", [a], forward)


def transpose(a: Tensor, axes: Sequence[int] | None = None) -> Tensor:
    perm = tuple(reversed(range(a.ndim))) if axes is None else tuple(axes)
    if sorted(perm) != list(range(a.ndim)):
        raise ShapeMismatchError("transpose", [a.shape], f"invalid permutation {perm}")
    inverse = tuple(np.argsort(perm))

    def forward(x: np.ndarray):
        return np.transpose(x, perm), lambda g: (np.transpose(g, inverse),)

    return record("transpose", [a], forward)


def concat(tensors: Sequence[Tensor], axis: int = -1) -> Tensor:
    if not tensors:
        msg = "concat needs at least one tensor"
        raise InvalidArgumentError(msg)
    ndim = tensors[0].ndim
    ax = axis % ndim
    for t in tensors:
        if t.ndim != ndim or any(
            t.shape[d] != tensors[0].shape[d] for d in range(ndim) if d != ax
        ):
            raise ShapeMismatchError("concat", [u.shape for u in tensors])
    bounds = np.cumsum([t.shape[ax] for t in tensors])[:-1]

    def forward(*xs: np.ndarray):
        def backward(g: np.ndarray):
            return tuple(np.split(g, bounds, axis=ax))

        return np.concatenate(xs, axis=ax), backward

    return record("concat", list(tensors), forward)


def stack(tensors: Sequence[Tensor], axis: int = 0) -> Tensor:
    if not tensors or any(t.shape != tensors[0].shape for t in tensors):
        raise ShapeMismatchError("stack", [t.shape for t in tensors])
    ax = axis % (tensors[0].ndim + 1)

    def forward(*xs: np.ndarray):
        def backward(g: np.ndarray):
            return tuple(np.take(g, i, axis=ax) for i in range(len(xs)))

        return np.stack(xs, axis=ax), backward

    return record("stack", list(tensors), forward)


def getitem(a: Tensor, key: int | tuple | slice) -> Tensor:
    """Basic (non-fancy) indexing."""

    def forward(x: np.ndarray):
        def backward(g: np.ndarray):
            grad = np.zeros_like(x)
            grad[key] = g
            return (grad,)

        return np.array(x[key]), backward

    try:
        return record("getitem", [a], forward)
    except IndexError as e:
        raise ShapeMismatchError("getitem", [a.shape], str(e)) from e


# =============================================================================
# Convolution and pooling
# =============================================================================


def _check_window(op: str, kernel: tuple[int, int], stride: tuple[int, int], padding: str) -> None:
    if padding not in _PADDINGS:
        msg = f"{op}: invalid padding kind {padding!r} (expected SAME or VALID)"
        raise InvalidArgumentError(msg)
    if min(stride) <= 0:
        msg = f"{op}: stride must be positive, got {stride}"
        raise InvalidArgumentError(msg)
    if min(kernel) <= 0:
        msg = f"{op}: kernel must be positive, got {kernel}"
        raise InvalidArgumentError(msg)


def window_geometry(extent: int, kernel: int, stride: int, padding: str) -> tuple[int, int, int]:
    """Output extent and (before, after) padding for one spatial axis."""
    if padding == "VALID":
        out = (extent - kernel) // stride + 1 if extent >= kernel else 0
        return out, 0, 0
    out = -(-extent // stride)
    total = max((out - 1) * stride + kernel - extent, 0)
    return out, total // 2, total - total // 2


def _windows(
    op: str,
    shape: tuple[int, ...],
    kernel: tuple[int, int],
    stride: tuple[int, int],
    padding: str,
) -> tuple[int, int, tuple[tuple[int, int], ...]]:
    oh, pt, pb = window_geometry(shape[1], kernel[0], stride[0], padding)
    ow, pl, pr = window_geometry(shape[2], kernel[1], stride[1], padding)
    if oh < 1 or ow < 1:
        raise ShapeMismatchError(
            op, [shape], f"kernel {kernel} does not fit the input extent (shape underflow)"
        )
    return oh, ow, ((0, 0), (pt, pb), (pl, pr), (0, 0))


def conv2d(
    x: Tensor,
    kernel: Tensor,
    stride: tuple[int, int] = (1, 1),
    padding: Padding = "SAME",
) -> Tensor:
    """Cross-correlation of x (B, H, W, C) with kernel (kh, kw, C, O)."""
    if x.ndim != 4 or kernel.ndim != 4 or x.shape[3] != kernel.shape[2]:
        raise ShapeMismatchError("conv2d", [x.shape, kernel.shape])
    kh, kw = kernel.shape[:2]
    _check_window("conv2d", (kh, kw), stride, padding)
    oh, ow, pads = _windows("conv2d", x.shape, (kh, kw), stride, padding)
    sh, sw = stride

    def forward(inp: np.ndarray, w: np.ndarray):
        xp = np.pad(inp, pads)
        out = np.zeros((inp.shape[0], oh, ow, w.shape[3]))
        taps = [
            (i, j, (_strided(i, oh, sh), _strided(j, ow, sw))) for i in range(kh) for j in range(kw)
        ]
        for i, j, (rows, cols) in taps:
            out += xp[:, rows, cols, :] @ w[i, j]

        def backward(g: np.ndarray):
            dxp = np.zeros_like(xp)
            dw = np.zeros_like(w)
            for i, j, (rows, cols) in taps:
                patch = xp[:, rows, cols, :]
                dw[i, j] = np.tensordot(patch, g, axes=([0, 1, 2], [0, 1, 2]))
                dxp[:, rows, cols, :] += g @ w[i, j].T
            (pt, _), (pl, _) = pads[1], pads[2]
            return dxp[:, pt : pt + inp.shape[1], pl : pl + inp.shape[2], :], dw

        return out, backward

    return record("conv2d", [x, kernel], forward)


def maxpool2d(
    x: Tensor,
    kernel: tuple[int, int],
    stride: tuple[int, int] | None = None,
    padding: Padding = "VALID",
) -> Tensor:
    """Max pooling of x (B, H, W, C); VALID extent = floor((in - k) / s) + 1."""
    if x.ndim != 4:
        raise ShapeMismatchError("maxpool2d", [x.shape], "expected (batch, time, freq, channels)")
    stride = stride or kernel
    _check_window("maxpool2d", kernel, stride, padding)
    oh, ow, pads = _windows("maxpool2d", x.shape, kernel, stride, padding)
    kh, kw = kernel
    sh, sw = stride

    def forward(inp: np.ndarray):
        xp = np.pad(inp, pads, constant_values=-np.inf)
        out = np.full((inp.shape[0], oh, ow, inp.shape[3]), -np.inf)
        winner = np.zeros(out.shape, dtype=np.int64)
        taps = [
            (i * kw + j, (_strided(i, oh, sh), _strided(j, ow, sw)))
            for i in range(kh)
            for j in range(kw)
        ]
        for tap, (rows, cols) in taps:
            patch = xp[:, rows, cols, :]
            better = patch > out
            out = np.where(better, patch, out)
            winner = np.where(better, tap, winner)

        def backward(g: np.ndarray):
            dxp = np.zeros_like(xp)
            for tap, (rows, cols) in taps:
                dxp[:, rows, cols, :] += np.where(winner == tap, g, 0.0)
            (pt, _), (pl, _) = pads[1], pads[2]
            return (dxp[:, pt : pt + inp.shape[1], pl : pl + inp.shape[2], :],)

        return out, backward

    return record("maxpool2d", [x], forward)


def _strided(start: int, count: int, step: int) -> slice:
    """Strided window positions ``start, start + step, ...`` (count of them)."""
    return np.s_[start : start + step * (count - 1) + 1 : step]


# =============================================================================
# Regularization and normalization
# =============================================================================


def dropout(a: Tensor, rate: float, train: bool, rng: np.random.Generator | None = None) -> Tensor:
    """Inverted dropout; identity when not training."""
    if not 0.0 <= rate < 1.0:
        msg = f"dropout rate must be in [0, 1), got {rate}"
        raise InvalidArgumentError(msg)
    if not train or rate == 0.0:
        return a
    generator = rng if rng is not None else np.random.default_rng()
    keep = (generator.random(a.shape) >= rate) / (1.0 - rate)

    def forward(x: np.ndarray):
        return x * keep, lambda g: (g * keep,)

    return record("dropout", [a], forward)


@dataclass
class BatchNormState:
    """Running statistics used at inference time."""

    mean: np.ndarray
    var: np.ndarray
    momentum: float = 0.9
    updates: int = field(default=0)

    @classmethod
    def create(cls, channels: int, momentum: float = 0.9) -> BatchNormState:
        return cls(mean=np.zeros(channels), var=np.ones(channels), momentum=momentum)


def batchnorm(
    x: Tensor,
    gamma: Tensor,
    beta: Tensor,
    state: BatchNormState,
    train: bool,
    eps: float = 1e-5,
) -> Tensor:
    """Normalize over every axis but the last (channel) axis."""
    channels = x.shape[-1]
    if gamma.shape != (channels,) or beta.shape != (channels,):
        raise ShapeMismatchError("batchnorm", [x.shape, gamma.shape, beta.shape])
    axes = tuple(range(x.ndim - 1))

    if not train:

        def infer(inp: np.ndarray, gam: np.ndarray, bet: np.ndarray):
            inv_std = 1.0 / np.sqrt(state.var + eps)
            xhat = (inp - state.mean) * inv_std

            def backward(g: np.ndarray):
                return g * gam * inv_std, (g * xhat).sum(axis=axes), g.sum(axis=axes)

            return gam * xhat + bet, backward

        return record("batchnorm", [x, gamma, beta], infer)

    def forward(inp: np.ndarray, gam: np.ndarray, bet: np.ndarray):
        count = inp.size // channels
        mu = inp.mean(axis=axes)
        var = inp.var(axis=axes)
        inv_std = 1.0 / np.sqrt(var + eps)
        xhat = (inp - mu) * inv_std
        state.mean = state.momentum * state.mean + (1.0 - state.momentum) * mu
        state.var = state.momentum * state.var + (1.0 - state.momentum) * var
        state.updates += 1

        def backward(g: np.ndarray):
            dxhat = g * gam
            dx = (
                inv_std
                / count
                * (
                    count * dxhat
                    - dxhat.sum(axis=axes)
                    - xhat * (dxhat * xhat).sum(axis=axes)
                )
            )
            return dx, (g * xhat).sum(axis=axes), g.sum(axis=axes)

        return gam * xhat + bet, backward

    return record("batchnorm", [x, gamma, beta], forward)
