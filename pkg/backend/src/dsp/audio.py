"""
PCM WAV input and output.

Provides:
- load_audio: Read a WAV file as a mono float waveform in [-1, 1].
- save_wav: Write a mono waveform as 16-bit PCM.
- view_audio_path: Resolve the per-view companion file of a clip.
"""

from __future__ import annotations

import logging
import warnings
from pathlib import Path

import numpy as np
from scipy.io import wavfile

from exceptions import AudioFormatError
from models.features import ViewKind, Waveform

logger = logging.getLogger(__name__)

_INT_SCALES = {
    np.dtype(np.int16): 32768.0,
    # 24-bit PCM is returned left-justified in int32
    np.dtype(np.int32): 2147483648.0,
}


def load_audio(path: Path | str) -> Waveform:
    """
    Load a PCM WAV file (8/16/24/32-bit int or 32-bit float).

    Multi-channel audio is averaged across channels.

    Raises:
        AudioFormatError: If the file is not a readable WAV or uses an
            unsupported sample encoding.
    """
    audio_path = Path(path)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", wavfile.WavFileWarning)
            rate, data = wavfile.read(audio_path, mmap=False)
    except FileNotFoundError as e:
        raise AudioFormatError(str(audio_path), "file not found") from e
    except (ValueError, EOFError, OSError) as e:
        raise AudioFormatError(str(audio_path), str(e) or type(e).__name__) from e

    if data.dtype == np.uint8:
        samples = (data.astype(np.float64) - 128.0) / 128.0
    elif data.dtype in _INT_SCALES:
        samples = data.astype(np.float64) / _INT_SCALES[data.dtype]
    elif data.dtype in (np.float32, np.float64):
        samples = data.astype(np.float64)
    else:
        raise AudioFormatError(str(audio_path), f"unsupported sample type {data.dtype}")

    if samples.ndim == 2:
        samples = samples.mean(axis=1)
    if rate <= 0:
        raise AudioFormatError(str(audio_path), f"invalid sample rate {rate}")

    logger.debug("Loaded %s: %d samples @ %d Hz", audio_path, len(samples), rate)
    return Waveform(samples=samples, sample_rate=int(rate))


def save_wav(path: Path | str, waveform: Waveform) -> None:
    """Write a waveform as mono 16-bit PCM (samples are clipped to [-1, 1])."""
    out = Path(path)
    out.parent.mkdir(parents=True, exist_ok=True)
    pcm = np.round(np.clip(waveform.samples, -1.0, 32767 / 32768) * 32768.0).astype("<i2")
    wavfile.write(out, waveform.sample_rate, pcm)


def view_audio_path(path: Path | str, view: ViewKind) -> Path:
    """
    Audio source of one view of a clip.

    ``clip.wav`` may come with companions ``clip.<view>.wav``; a view uses its
    companion when one exists and the clip itself otherwise.
    """
    base = Path(path)
    companion = base.with_name(f"{base.stem}.{view.value}{base.suffix}")
    return companion if companion.is_file() else base
