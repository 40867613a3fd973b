"""Network assembly: 2D/1D CRNN subnetworks and the multi-view network."""

from networks.crnn import Crnn1d, Crnn2d, CrnnSubnet, build_crnn1d, build_crnn2d, build_subnet
from networks.multiview import (
    MultiViewNet,
    NetworkOutput,
    SingleViewNet,
    ViewNet,
    build_multiview,
    build_single_view,
    softmax_rows,
)

__all__ = [
    "Crnn1d",
    "Crnn2d",
    "CrnnSubnet",
    "MultiViewNet",
    "NetworkOutput",
    "SingleViewNet",
    "ViewNet",
    "build_crnn1d",
    "build_crnn2d",
    "build_multiview",
    "build_single_view",
    "build_subnet",
    "softmax_rows",
]
