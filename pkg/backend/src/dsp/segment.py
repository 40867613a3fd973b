"""
Fixed-length segmentation of view data.

Training draws one crop per clip; inference takes S segments evenly spread
over the clip, S being the clip duration in whole seconds.
"""

from __future__ import annotations

import math
from typing import TYPE_CHECKING, Literal

import numpy as np

from exceptions import InvalidArgumentError, SignalTooShortError

if TYPE_CHECKING:
    from models.features import SegmentSpec

SegmentMode = Literal["train", "infer"]


def segments_for_duration(duration: float) -> int:
    """S = round(duration in seconds), at least one."""
    return max(1, math.floor(duration + 0.5))


def segment_offsets(length: int, seg_len: int, count: int) -> np.ndarray:
    """Start offsets evenly spaced over [0, length - seg_len]."""
    if length < seg_len:
        raise SignalTooShortError("segment", length, seg_len)
    return np.round(np.linspace(0, length - seg_len, count)).astype(np.int64)


def segment(
    data: np.ndarray,
    spec: SegmentSpec,
    mode: SegmentMode,
    *,
    duration: float | None = None,
    n_segments: int | None = None,
    position: float | None = None,
    rng: np.random.Generator | None = None,
) -> list[np.ndarray]:
    """
    Cut fixed-length segments along the first axis of ``data``.

    Args:
        data: View data, (T, F) frames or (N, 1) samples.
        spec: Segment length of the view.
        mode: ``train`` for one crop, ``infer`` for evenly spaced segments.
        duration: Clip duration in seconds (sets S in infer mode).
        n_segments: Explicit S, overriding ``duration``.
        position: Crop position in [0, 1] for train mode; drawn from ``rng`` if None.
        rng: Random generator for train-mode crops.

    Raises:
        SignalTooShortError: If the data is shorter than one segment.
    """
    length = data.shape[0]
    seg_len = spec.length
    if length < seg_len:
        raise SignalTooShortError(f"segment ({spec.view.value})", length, seg_len)

    if mode == "train":
        if position is None:
            generator = rng if rng is not None else np.random.default_rng()
            start = int(generator.integers(0, length - seg_len + 1))
        else:
            start = round(min(max(position, 0.0), 1.0) * (length - seg_len))
        return [data[start : start + seg_len]]

    if mode != "infer":
        msg = f"unknown segment mode {mode!r}"
        raise InvalidArgumentError(msg)
    if n_segments is None:
        if duration is None:
            msg = "infer mode needs a duration or an explicit segment count"
            raise InvalidArgumentError(msg)
        n_segments = segments_for_duration(duration)
    offsets = segment_offsets(length, seg_len, n_segments)
    return [data[int(o) : int(o) + seg_len] for o in offsets]
