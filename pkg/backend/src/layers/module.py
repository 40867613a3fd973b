"""
Base class for parameterized layers.

A ``Module`` owns named ``Parameter`` objects and batchnorm running
statistics, registered once at construction. Children are registered the
same way, so ``parameters()`` on the root yields every weight exactly once.
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from typing import TYPE_CHECKING, Any

import numpy as np

from autodiff import BatchNormState, Parameter, Tensor, ops
from exceptions import InvalidArgumentError, MissingCheckpointError, ShapeMismatchError

if TYPE_CHECKING:
    from collections.abc import Iterator

RUNNING_MEAN = "running_mean"
RUNNING_VAR = "running_var"


def glorot_uniform(
    rng: np.random.Generator,
    shape: tuple[int, ...],
    fan_in: int,
    fan_out: int,
) -> np.ndarray:
    limit = math.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape)


class Module(ABC):
    """Named container of parameters, running statistics and child modules."""

    def __init__(self, name: str) -> None:
        self.name = name
        self._parameters: dict[str, Parameter] = {}
        self._states: dict[str, BatchNormState] = {}
        self._children: dict[str, Module] = {}

    # -------------------------------------------------------------------------
    # Registration
    # -------------------------------------------------------------------------

    def _scoped(self, key: str) -> str:
        return f"{self.name}/{key}"

    def add_parameter(self, key: str, value: np.ndarray) -> Parameter:
        if key in self._parameters:
            msg = f"parameter {self._scoped(key)} registered twice"
            raise InvalidArgumentError(msg)
        param = Parameter(self._scoped(key), value)
        self._parameters[key] = param
        return param

    def add_state(self, key: str, state: BatchNormState) -> BatchNormState:
        self._states[key] = state
        return state

    def add_child[M: Module](self, key: str, child: M) -> M:
        if key in self._children:
            msg = f"child {self._scoped(key)} registered twice"
            raise InvalidArgumentError(msg)
        self._children[key] = child
        return child

    def child_name(self, key: str) -> str:
        return self._scoped(key)

    # -------------------------------------------------------------------------
    # Traversal
    # -------------------------------------------------------------------------

    def modules(self) -> Iterator[Module]:
        yield self
        for child in self._children.values():
            yield from child.modules()

    def parameters(self) -> list[Parameter]:
        seen: set[int] = set()
        params: list[Parameter] = []
        for module in self.modules():
            for param in module._parameters.values():
                if id(param) not in seen:
                    seen.add(id(param))
                    params.append(param)
        return params

    def named_states(self) -> dict[str, BatchNormState]:
        return {
            module._scoped(key): state
            for module in self.modules()
            for key, state in module._states.items()
        }

    def parameter_count(self) -> int:
        return sum(p.value.size for p in self.parameters())

    # -------------------------------------------------------------------------
    # Serialization
    # -------------------------------------------------------------------------

    def state_dict(self) -> dict[str, np.ndarray]:
        """Parameters and running statistics keyed by their scoped names."""
        entries = {p.name: p.value.copy() for p in self.parameters()}
        for name, state in self.named_states().items():
            entries[f"{name}/{RUNNING_MEAN}"] = state.mean.copy()
            entries[f"{name}/{RUNNING_VAR}"] = state.var.copy()
        return entries

    def load_state_dict(self, entries: dict[str, np.ndarray]) -> None:
        """
        Restore parameters and running statistics.

        Raises:
            MissingCheckpointError: If any expected entry is absent.
            ShapeMismatchError: If an entry has the wrong shape.
        """
        expected = self.state_dict()
        missing = sorted(set(expected) - set(entries))
        if missing:
            raise MissingCheckpointError(missing)
        for name, current in expected.items():
            if entries[name].shape != current.shape:
                raise ShapeMismatchError(
                    "load_state_dict", [current.shape, entries[name].shape], name
                )
        for param in self.parameters():
            param.value = np.array(entries[param.name], dtype=np.float64)
        for name, state in self.named_states().items():
            state.mean = np.array(entries[f"{name}/{RUNNING_MEAN}"], dtype=np.float64)
            state.var = np.array(entries[f"{name}/{RUNNING_VAR}"], dtype=np.float64)

    @abstractmethod
    def forward(self, *args: Any, **kwargs: Any) -> Any: ...

    def __call__(self, *args: Any, **kwargs: Any) -> Any:
        return self.forward(*args, **kwargs)

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.name!r}, params={self.parameter_count()})"


def as_input(x: Tensor | np.ndarray) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)


def add_batch_axis(x: Tensor, rank: int) -> tuple[Tensor, bool]:
    """Treat a rank ``rank - 1`` input as a batch of one."""
    if x.ndim == rank:
        return x, False
    if x.ndim == rank - 1:
        return ops.reshape(x, (1, *x.shape)), True
    raise ShapeMismatchError("layer input", [x.shape], f"expected rank {rank - 1} or {rank}")


def drop_batch_axis(x: Tensor, squeezed: bool) -> Tensor:
    return ops.reshape(x, x.shape[1:]) if squeezed else x
