"""
Audio front end: WAV input, filterbanks, log spectrogram views, segmentation.
"""

from dsp.audio import load_audio, save_wav, view_audio_path
from dsp.segment import segment, segment_offsets, segments_for_duration
from dsp.spectrogram import (
    cqt_spectrogram,
    extract_view,
    gammatone_spectrogram,
    mel_spectrogram,
    stft_magnitude,
)

__all__ = [
    "cqt_spectrogram",
    "extract_view",
    "gammatone_spectrogram",
    "load_audio",
    "mel_spectrogram",
    "save_wav",
    "segment",
    "segment_offsets",
    "segments_for_duration",
    "stft_magnitude",
    "view_audio_path",
]
