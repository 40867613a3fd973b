"""Layer vocabulary of the CRNN subnetworks."""

from layers.attention import AttentionPool
from layers.conv import ConvBlock
from layers.dense import Dense, FCStack
from layers.module import Module, glorot_uniform
from layers.recurrent import GRU, BiGRU

__all__ = [
    "GRU",
    "AttentionPool",
    "BiGRU",
    "ConvBlock",
    "Dense",
    "FCStack",
    "Module",
    "glorot_uniform",
]
