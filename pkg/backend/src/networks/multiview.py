"""
Multi-view network with one classification branch per view plus a joint
branch over the concatenated embeddings.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from autodiff import Parameter, Tensor, ops
from exceptions import InvalidArgumentError
from layers import FCStack, Module
from layers.module import as_input
from models.features import ViewKind
from models.network import JOINT_BRANCH
from networks.crnn import CrnnSubnet, build_subnet

if TYPE_CHECKING:
    from collections.abc import Mapping

    from models.network import NetworkConfig

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class NetworkOutput:
    """Logits per branch id and embeddings per view."""

    logits: dict[str, Tensor]
    embeddings: dict[str, Tensor]

    def probabilities(self) -> dict[str, np.ndarray]:
        return {branch: softmax_rows(t.data) for branch, t in self.logits.items()}


def softmax_rows(logits: np.ndarray) -> np.ndarray:
    shifted = np.exp(logits - logits.max(axis=-1, keepdims=True))
    return shifted / shifted.sum(axis=-1, keepdims=True)


def _view_inputs(
    inputs: Mapping[ViewKind | str, Tensor | np.ndarray], views: tuple[ViewKind, ...]
) -> dict[ViewKind, Tensor]:
    resolved = {ViewKind.parse(str(key)): value for key, value in inputs.items()}
    missing = [v.value for v in views if v not in resolved]
    if missing:
        msg = f"missing inputs for views: {', '.join(missing)}"
        raise InvalidArgumentError(msg)
    return {v: as_input(resolved[v]) for v in views}


class MultiViewNet(Module):
    """
    Subnet per view, each keeping its own head, plus the joint head over the
    concatenation of all view embeddings.
    """

    def __init__(self, cfg: NetworkConfig, rng: np.random.Generator, name: str = "net") -> None:
        super().__init__(name)
        self.cfg = cfg
        self.subnets: dict[ViewKind, CrnnSubnet] = {}
        for view in cfg.views:
            subnet = build_subnet(cfg, view, rng, name=self.child_name(view.value))
            self.subnets[view] = self.add_child(view.value, subnet)
        self.joint = self.add_child(
            JOINT_BRANCH,
            FCStack(
                self.child_name(JOINT_BRANCH),
                self.joint_width,
                cfg.joint_widths,
                cfg.n_classes,
                rng,
                dropout=cfg.dropout,
            ),
        )

    @property
    def views(self) -> tuple[ViewKind, ...]:
        return self.cfg.views

    @property
    def branches(self) -> tuple[str, ...]:
        return self.cfg.branches

    @property
    def joint_width(self) -> int:
        return sum(s.embedding_width for s in self.subnets.values())

    def branch_parameters(self, branch: str) -> list[Parameter]:
        """Parameters owned exclusively by one branch head."""
        if branch == JOINT_BRANCH:
            return self.joint.parameters()
        return self.subnets[ViewKind.parse(branch)].head.parameters()

    def forward(
        self,
        inputs: Mapping[ViewKind | str, Tensor | np.ndarray],
        *,
        train: bool = False,
        rng: np.random.Generator | None = None,
    ) -> NetworkOutput:
        views = _view_inputs(inputs, self.views)
        embeddings: dict[str, Tensor] = {}
        logits: dict[str, Tensor] = {}
        for view, subnet in self.subnets.items():
            embedding = subnet.embed(views[view], train=train, rng=rng)
            embeddings[view.value] = embedding
            logits[view.value] = subnet.logits(embedding, train=train, rng=rng)
        joint_input = ops.concat(list(embeddings.values()), axis=-1)
        logits[JOINT_BRANCH] = self.joint(joint_input, train=train, rng=rng)
        return NetworkOutput(logits=logits, embeddings=embeddings)


class SingleViewNet(Module):
    """A standalone subnet exposing the same output contract as ``MultiViewNet``."""

    def __init__(self, cfg: NetworkConfig, view: ViewKind, rng: np.random.Generator) -> None:
        super().__init__("net")
        self.cfg = cfg.with_views((view,))
        self.view = view
        self.subnet = self.add_child(
            view.value, build_subnet(self.cfg, view, rng, name=self.child_name(view.value))
        )

    @property
    def views(self) -> tuple[ViewKind, ...]:
        return (self.view,)

    @property
    def branches(self) -> tuple[str, ...]:
        return (self.view.value,)

    def forward(
        self,
        inputs: Mapping[ViewKind | str, Tensor | np.ndarray],
        *,
        train: bool = False,
        rng: np.random.Generator | None = None,
    ) -> NetworkOutput:
        x = _view_inputs(inputs, self.views)[self.view]
        embedding = self.subnet.embed(x, train=train, rng=rng)
        return NetworkOutput(
            logits={self.view.value: self.subnet.logits(embedding, train=train, rng=rng)},
            embeddings={self.view.value: embedding},
        )


def build_multiview(cfg: NetworkConfig, seed: int = 0) -> MultiViewNet:
    """
    Build the multi-view network.

    Raises:
        InvalidArgumentError: If the configuration names no view.
    """
    if not cfg.views:
        msg = "multi-view network needs at least one view"
        raise InvalidArgumentError(msg)
    net = MultiViewNet(cfg, np.random.default_rng(seed))
    logger.info(
        "Built multi-view network: views=%s branches=%d joint_width=%d params=%d",
        ",".join(v.value for v in cfg.views),
        len(net.branches),
        net.joint_width,
        net.parameter_count(),
    )
    return net


def build_single_view(cfg: NetworkConfig, view: ViewKind, seed: int = 0) -> SingleViewNet:
    net = SingleViewNet(cfg, view, np.random.default_rng(seed))
    logger.info("Built single-view network: view=%s params=%d", view.value, net.parameter_count())
    return net


ViewNet = MultiViewNet | SingleViewNet
