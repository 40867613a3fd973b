"""
CRNN subnetworks.

Both kinds end in the same tail: the frequency axis is collapsed by the
convolution chain, the (T, C) sequence runs through a bidirectional GRU,
attention pooling yields the embedding, and a fully connected head maps it
to class logits.
"""

from __future__ import annotations

import logging
from abc import abstractmethod
from typing import TYPE_CHECKING

import numpy as np

from autodiff import Tensor, ops
from exceptions import InvalidArgumentError, ShapeMismatchError
from layers import AttentionPool, BiGRU, ConvBlock, FCStack, Module
from layers.module import as_input
from models.features import ViewKind

if TYPE_CHECKING:
    from models.network import ConvBlockSpec, NetworkConfig

logger = logging.getLogger(__name__)


class CrnnSubnet(Module):
    """Shared recurrent tail of the 2D and 1D subnetworks."""

    def __init__(self, name: str, cfg: NetworkConfig, view: ViewKind) -> None:
        super().__init__(name)
        self.cfg = cfg
        self.view = view
        self.blocks: list[ConvBlock] = []

    def _build_tail(self, channels: int, rng: np.random.Generator) -> None:
        cfg = self.cfg
        self.gru = self.add_child(
            "birnn", BiGRU(self.child_name("birnn"), channels, cfg.gru_hidden, rng)
        )
        self.attention = self.add_child(
            "attention",
            AttentionPool(
                self.child_name("attention"), self.gru.output_dim, cfg.attention_dim, rng
            ),
        )
        self.head = self.add_child(
            "head",
            FCStack(
                self.child_name("head"),
                self.gru.output_dim,
                cfg.fc_widths,
                cfg.n_classes,
                rng,
                dropout=cfg.dropout,
            ),
        )

    def _add_block(
        self, key: str, spec: ConvBlockSpec, in_channels: int, rng: np.random.Generator
    ) -> ConvBlock:
        block = self.add_child(key, ConvBlock(self.child_name(key), spec, in_channels, rng))
        self.blocks.append(block)
        return block

    @property
    def embedding_width(self) -> int:
        return self.gru.output_dim

    @abstractmethod
    def _prepare(self, x: Tensor) -> tuple[Tensor, bool]:
        """Bring the view input to its batched 4-D layout."""

    @abstractmethod
    def feature_map(
        self, x: Tensor, *, train: bool, rng: np.random.Generator | None
    ) -> Tensor:
        """Convolution front end, returning (B, T', 1, C)."""

    def embed(
        self,
        x: Tensor | np.ndarray,
        *,
        train: bool = False,
        rng: np.random.Generator | None = None,
    ) -> Tensor:
        """Embedding of shape (B, 2H), or (2H,) for an unbatched input."""
        batched, squeezed = self._prepare(as_input(x))
        fmap = self.feature_map(batched, train=train, rng=rng)
        batch, steps, freq, channels = fmap.shape
        if freq != 1:
            raise ShapeMismatchError(
                f"{self.name} reshape", [fmap.shape], "frequency axis was not collapsed to 1"
            )
        sequence = ops.reshape(fmap, (batch, steps, channels))
        hidden = ops.dropout(self.gru(sequence), self.cfg.dropout, train, rng)
        embedding = self.attention(hidden)
        return ops.reshape(embedding, embedding.shape[1:]) if squeezed else embedding

    def logits(
        self,
        embedding: Tensor,
        *,
        train: bool = False,
        rng: np.random.Generator | None = None,
    ) -> Tensor:
        return self.head(embedding, train=train, rng=rng)

    def forward(
        self,
        x: Tensor | np.ndarray,
        *,
        train: bool = False,
        rng: np.random.Generator | None = None,
    ) -> Tensor:
        return self.logits(self.embed(x, train=train, rng=rng), train=train, rng=rng)


class Crnn2d(CrnnSubnet):
    """Spectrogram subnet: (T, F, 1) through the 2D block chain."""

    def __init__(
        self, name: str, cfg: NetworkConfig, view: ViewKind, rng: np.random.Generator
    ) -> None:
        super().__init__(name, cfg, view)
        channels = 1
        for i, spec in enumerate(cfg.blocks_2d, start=1):
            self._add_block(f"conv{i}", spec, channels, rng)
            channels = spec.n_filters
        self._build_tail(channels, rng)

    def _prepare(self, x: Tensor) -> tuple[Tensor, bool]:
        if x.ndim == 2:
            x = ops.reshape(x, (1, *x.shape, 1))
            squeezed = True
        elif x.ndim == 3:
            x = ops.reshape(x, (1, *x.shape))
            squeezed = True
        elif x.ndim == 4:
            squeezed = False
        else:
            raise ShapeMismatchError(
                self.name, [x.shape], "expected (T, F), (T, F, 1) or (B, T, F, 1)"
            )
        if x.shape[2] != self.cfg.n_bands or x.shape[3] != 1:
            raise ShapeMismatchError(
                self.name, [x.shape], f"expected {self.cfg.n_bands} bands and one channel"
            )
        return x, squeezed

    def feature_map(self, x: Tensor, *, train: bool, rng: np.random.Generator | None) -> Tensor:
        for block in self.blocks:
            x = block(x, train=train, rng=rng)
        return x


class Crnn1d(CrnnSubnet):
    """
    Raw waveform subnet.

    conv01 and conv02 (with pool02) turn the waveform into a (T, 1, C) map,
    which is reshaped to (T, C, 1) and fed to conv1/pool1 and the 2D block chain.
    """

    def __init__(
        self, name: str, cfg: NetworkConfig, view: ViewKind, rng: np.random.Generator
    ) -> None:
        super().__init__(name, cfg, view)
        front = cfg.raw_front
        self.conv01 = self._add_block("conv01", front.conv01, 1, rng)
        self.conv02 = self._add_block("conv02", front.conv02, front.conv01.n_filters, rng)
        self.conv1 = self._add_block("conv1", front.conv1, 1, rng)
        channels = front.conv1.n_filters
        for i, spec in enumerate(cfg.blocks_1d, start=2):
            self._add_block(f"conv{i}", spec, channels, rng)
            channels = spec.n_filters
        self._build_tail(channels, rng)

    def _prepare(self, x: Tensor) -> tuple[Tensor, bool]:
        length = self.cfg.raw_front.input_length
        if x.ndim == 1:
            x, squeezed = ops.reshape(x, (1, x.shape[0], 1, 1)), True
        elif x.ndim == 2:
            x, squeezed = ops.reshape(x, (*x.shape, 1, 1)), False
        elif x.ndim == 4:
            squeezed = False
        else:
            raise ShapeMismatchError(self.name, [x.shape], "expected (N,), (B, N) or (B, N, 1, 1)")
        if x.shape[1] != length or x.shape[2:] != (1, 1):
            raise ShapeMismatchError(
                self.name, [x.shape], f"unsupported raw input length (configured for {length})"
            )
        return x, squeezed

    def feature_map(self, x: Tensor, *, train: bool, rng: np.random.Generator | None) -> Tensor:
        x = self.conv02(self.conv01(x, train=train, rng=rng), train=train, rng=rng)
        batch, steps, _, channels = x.shape
        x = ops.reshape(x, (batch, steps, channels, 1))
        for block in self.blocks[2:]:
            x = block(x, train=train, rng=rng)
        return x


def build_crnn2d(
    cfg: NetworkConfig,
    view: ViewKind = ViewKind.MEL,
    rng: np.random.Generator | None = None,
    name: str | None = None,
) -> Crnn2d:
    if not view.is_spectral:
        msg = f"2D subnet needs a spectral view, got {view.value}"
        raise InvalidArgumentError(msg)
    subnet = Crnn2d(name or view.value, cfg, view, rng or np.random.default_rng(0))
    logger.debug("Built %s with %d parameters", subnet.name, subnet.parameter_count())
    return subnet


def build_crnn1d(
    cfg: NetworkConfig,
    rng: np.random.Generator | None = None,
    name: str | None = None,
) -> Crnn1d:
    subnet = Crnn1d(name or ViewKind.RAW.value, cfg, ViewKind.RAW, rng or np.random.default_rng(0))
    logger.debug("Built %s with %d parameters", subnet.name, subnet.parameter_count())
    return subnet


def build_subnet(
    cfg: NetworkConfig,
    view: ViewKind,
    rng: np.random.Generator | None = None,
    name: str | None = None,
) -> CrnnSubnet:
    if view is ViewKind.RAW:
        return build_crnn1d(cfg, rng, name)
    return build_crnn2d(cfg, view, rng, name)
