"""
Tensors, parameters and the define-by-run gradient tape.

A ``Tape`` is an append-only list of nodes. Every primitive applied to a
tensor that is already recorded on a tape appends one node holding the
closure that maps the output gradient to input gradients. ``Tape.backward``
walks the nodes once, in reverse id order.
"""

from __future__ import annotations

import logging
from contextvars import ContextVar, Token
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from exceptions import InvalidArgumentError

if TYPE_CHECKING:
    from collections.abc import Callable, Iterable, Sequence

    BackwardFn = Callable[[np.ndarray], Sequence[np.ndarray | None]]
    ForwardFn = Callable[..., tuple[np.ndarray, BackwardFn]]

logger = logging.getLogger(__name__)

_ACTIVE_TAPE: ContextVar[Tape | None] = ContextVar("active_tape", default=None)


def active_tape() -> Tape | None:
    """Return the tape entered with ``with tape:``, if any."""
    return _ACTIVE_TAPE.get()


class Tensor:
    """Dense float64 array, optionally recorded on a tape."""

    __slots__ = ("data", "node_id", "tape")

    def __init__(
        self,
        data: np.ndarray | float | Sequence[float],
        *,
        node_id: int | None = None,
        tape: Tape | None = None,
    ) -> None:
        self.data = np.asarray(data, dtype=np.float64)
        self.node_id = node_id
        self.tape = tape

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return int(self.data.size)

    @property
    def recorded(self) -> bool:
        """Whether this tensor participates in differentiation."""
        return self.node_id is not None

    def item(self) -> float:
        """The value of a one-element tensor."""
        if self.data.size != 1:
            msg = f"item() needs a one-element tensor, got shape {self.shape}"
            raise InvalidArgumentError(msg)
        return float(self.data.reshape(-1)[0])

    def numpy(self) -> np.ndarray:
        return self.data

    def detach(self) -> Tensor:
        return Tensor(self.data)

    def __repr__(self) -> str:
        return f"Tensor(shape={self.shape}, node_id={self.node_id})"


class Parameter:
    """A named trainable array that persists across tapes."""

    __slots__ = ("name", "value")

    def __init__(self, name: str, value: np.ndarray) -> None:
        self.name = name
        self.value = np.asarray(value, dtype=np.float64)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.value.shape

    def tensor(self) -> Tensor:
        """Lift the parameter onto the active tape (once per tape)."""
        tape = active_tape()
        if tape is None:
            return Tensor(self.value)
        return tape.watch(self)

    def __repr__(self) -> str:
        return f"Parameter({self.name!r}, shape={self.shape})"


@dataclass(frozen=True, slots=True)
class Node:
    """One recorded operation."""

    node_id: int
    op: str
    inputs: tuple[int | None, ...]
    backward: BackwardFn | None
    shape: tuple[int, ...]


class Gradients:
    """Result of a backward pass; unreachable tensors read as zero."""

    def __init__(self, tape: Tape, grads: dict[int, np.ndarray]) -> None:
        self._tape = tape
        self._grads = grads

    def __contains__(self, tensor: Tensor) -> bool:
        return tensor.node_id is not None and tensor.node_id in self._grads

    def of(self, tensor: Tensor) -> np.ndarray:
        if tensor.node_id is None:
            msg = "Tensor is not recorded on a tape and has no gradient"
            raise InvalidArgumentError(msg)
        grad = self._grads.get(tensor.node_id)
        return np.zeros(tensor.shape) if grad is None else grad

    def for_parameter(self, param: Parameter) -> np.ndarray:
        node_id = self._tape.parameter_node(param)
        if node_id is None:
            return np.zeros(param.shape)
        grad = self._grads.get(node_id)
        return np.zeros(param.shape) if grad is None else grad

    def for_parameters(self, params: Iterable[Parameter]) -> dict[str, np.ndarray]:
        return {p.name: self.for_parameter(p) for p in params}


class Tape:
    """
    Append-only record of differentiable operations.

    Use as a context manager so parameters lift onto it:

        with Tape() as tape:
            loss = model(x)
        grads = tape.backward(loss)
    """

    def __init__(self) -> None:
        self.nodes: list[Node] = []
        self._watched: dict[int, tuple[Parameter, Tensor]] = {}
        self._token: Token[Tape | None] | None = None

    def __enter__(self) -> Tape:
        self._token = _ACTIVE_TAPE.set(self)
        return self

    def __exit__(self, *exc: object) -> None:
        if self._token is not None:
            _ACTIVE_TAPE.reset(self._token)
            self._token = None

    def __len__(self) -> int:
        return len(self.nodes)

    def _append(
        self,
        op: str,
        inputs: tuple[int | None, ...],
        backward: BackwardFn | None,
        value: np.ndarray,
    ) -> Tensor:
        node_id = len(self.nodes)
        self.nodes.append(Node(node_id, op, inputs, backward, value.shape))
        return Tensor(value, node_id=node_id, tape=self)

    def variable(self, value: np.ndarray | float | Sequence[float], op: str = "leaf") -> Tensor:
        """Record a leaf tensor (an input we want gradients for)."""
        return self._append(op, (), None, np.asarray(value, dtype=np.float64))

    def watch(self, param: Parameter) -> Tensor:
        key = id(param)
        if key not in self._watched:
            self._watched[key] = (param, self.variable(param.value, op=f"param:{param.name}"))
        return self._watched[key][1]

    def parameter_node(self, param: Parameter) -> int | None:
        entry = self._watched.get(id(param))
        return None if entry is None else entry[1].node_id

    def record(
        self,
        op_kind: str,
        inputs: Sequence[Tensor],
        forward_fn: ForwardFn,
    ) -> Tensor:
        """
        Evaluate ``forward_fn`` on the input arrays and append a node.

        ``forward_fn`` returns the output array and a closure mapping the
        output gradient to one gradient (or None) per input.
        """
        value, backward = forward_fn(*(t.data for t in inputs))
        input_ids = tuple(t.node_id if t.tape is self else None for t in inputs)
        if all(i is None for i in input_ids):
            return Tensor(value)
        return self._append(op_kind, input_ids, backward, value)

    def backward(self, loss: Tensor) -> Gradients:
        """
        Reverse-mode sweep from a scalar loss.

        Raises:
            InvalidArgumentError: If ``loss`` is not a recorded scalar.
        """
        if loss.size != 1:
            msg = f"backward needs a scalar loss, got shape {loss.shape}"
            raise InvalidArgumentError(msg)
        if loss.node_id is None or loss.tape is not self:
            msg = "loss is not recorded on this tape"
            raise InvalidArgumentError(msg)

        grads: dict[int, np.ndarray] = {loss.node_id: np.ones(loss.shape)}
        for node in reversed(self.nodes[: loss.node_id + 1]):
            grad = grads.get(node.node_id)
            if grad is None or node.backward is None:
                continue
            for input_id, input_grad in zip(node.inputs, node.backward(grad), strict=True):
                if input_id is None or input_grad is None:
                    continue
                if input_id in grads:
                    grads[input_id] = grads[input_id] + input_grad
                else:
                    grads[input_id] = input_grad
        logger.debug("Backward pass over %d nodes", loss.node_id + 1)
        return Gradients(self, grads)


def record(op_kind: str, inputs: Sequence[Tensor], forward_fn: ForwardFn) -> Tensor:
    """Apply a primitive, recording it on the inputs' tape when there is one."""
    tape = next((t.tape for t in inputs if t.tape is not None and t.node_id is not None), None)
    if tape is None:
        value, _ = forward_fn(*(t.data for t in inputs))
        return Tensor(value)
    return tape.record(op_kind, inputs, forward_fn)


def as_tensor(value: Tensor | np.ndarray | float) -> Tensor:
    return value if isinstance(value, Tensor) else Tensor(value)
