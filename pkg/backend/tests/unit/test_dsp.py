"""
Unit tests for the audio front end: WAV I/O, filterbanks, spectrogram views
and segmentation.
"""

from __future__ import annotations

from typing import TYPE_CHECKING

import numpy as np
import pytest
from scipy.io import wavfile

from dsp import (
    cqt_spectrogram,
    extract_view,
    gammatone_spectrogram,
    load_audio,
    mel_spectrogram,
    segment,
    segment_offsets,
    segments_for_duration,
    view_audio_path,
)
from dsp.filterbanks import (
    cqt_frequencies,
    cqt_kernel,
    gammatone_filterbank,
    mel_filterbank,
    mel_weight_at,
)
from dsp.spectrogram import frame_count
from exceptions import AudioFormatError, InvalidArgumentError, SignalTooShortError
from models.features import LOG_FLOOR, SegmentSpec, SpectrogramConfig, ViewKind, Waveform
from tests.utils import write_tone

if TYPE_CHECKING:
    from pathlib import Path


def _silence(seconds: float, rate: int) -> Waveform:
    return Waveform(samples=np.zeros(round(seconds * rate)), sample_rate=rate)


def _tone(freq: float, seconds: float, rate: int) -> Waveform:
    t = np.arange(round(seconds * rate)) / rate
    return Waveform(samples=0.5 * np.sin(2 * np.pi * freq * t), sample_rate=rate)


# =============================================================================
# WAV input
# =============================================================================


class TestLoadAudio:
    def test_mono_sample_count_and_rate(self, tmp_path: Path) -> None:
        path = write_tone(tmp_path / "tone.wav", 440.0, 5.0, 44100)
        waveform = load_audio(path)
        assert waveform.sample_rate == 44100
        assert len(waveform.samples) == 220500
        assert np.max(np.abs(waveform.samples)) <= 1.0

    def test_stereo_is_averaged(self, tmp_path: Path) -> None:
        left = (np.sin(np.linspace(0, 40, 800)) * 12000).astype(np.int16)
        path = tmp_path / "stereo.wav"
        wavfile.write(path, 8000, np.stack([left, -left], axis=1))
        waveform = load_audio(path)
        assert waveform.samples.shape == (800,)
        np.testing.assert_array_equal(waveform.samples, np.zeros(800))

    def test_float_wav(self, tmp_path: Path) -> None:
        path = tmp_path / "float.wav"
        wavfile.write(path, 16000, np.full(160, 0.25, dtype=np.float32))
        np.testing.assert_allclose(load_audio(path).samples, 0.25)

    def test_not_a_wav(self, tmp_path: Path) -> None:
        path = tmp_path / "notes.wav"
        path.write_text("definitely not audio")
        with pytest.raises(AudioFormatError) as exc_info:
            load_audio(path)
        assert exc_info.value.path == str(path)

    def test_missing_file(self, tmp_path: Path) -> None:
        with pytest.raises(AudioFormatError, match="not found"):
            load_audio(tmp_path / "absent.wav")


class TestViewAudioPath:
    def test_companion_preferred(self, tmp_path: Path) -> None:
        clip = write_tone(tmp_path / "c0.wav", 300.0, 0.1, 8000)
        companion = write_tone(tmp_path / "c0.cqt.wav", 300.0, 0.1, 8000)
        assert view_audio_path(clip, ViewKind.CQT) == companion

    def test_falls_back_to_clip(self, tmp_path: Path) -> None:
        clip = write_tone(tmp_path / "c0.wav", 300.0, 0.1, 8000)
        assert view_audio_path(clip, ViewKind.MEL) == clip


# =============================================================================
# Filterbanks
# =============================================================================


class TestFilterbanks:
    def test_mel_centers_increase(self) -> None:
        bank = mel_filterbank(16000, 1024, 64)
        assert bank.weights.shape == (64, 513)
        assert np.all(np.diff(bank.center_freqs) > 0)
        assert bank.center_freqs[-1] < 8000

    def test_cqt_bins_are_semitones(self) -> None:
        freqs = cqt_frequencies(110.0, 25, 12)
        assert freqs[12] == pytest.approx(220.0)
        assert freqs[24] == pytest.approx(440.0)

    def test_cqt_kernel_fits_below_nyquist(self) -> None:
        kernel = cqt_kernel(22050, 64, 12)
        assert kernel.bank.center_freqs[-1] <= 11025.0
        assert kernel.spectral.shape == (kernel.n_fft, 64)
        assert kernel.n_fft >= kernel.longest


# =============================================================================
# Spectrogram views
# =============================================================================


class TestSpectrogramShapes:
    def test_frame_count(self) -> None:
        assert frame_count(1_323_000, 1764, 882) == 1499

    @pytest.mark.parametrize("view", [ViewKind.MEL, ViewKind.GAMMATONE])
    def test_stft_views_at_44k(self, view: ViewKind) -> None:
        waveform = _tone(1000.0, 30.0, 44100)
        matrix = extract_view(waveform, view)
        assert matrix.shape == (1499, 64)

    def test_cqt_at_22k(self) -> None:
        spec = cqt_spectrogram(_tone(440.0, 30.0, 22050), SpectrogramConfig(view_kind=ViewKind.CQT))
        assert spec.shape == (1292, 64)

    def test_cqt_hop_follows_rate(self) -> None:
        cfg = SpectrogramConfig(view_kind=ViewKind.CQT)
        assert cfg.resolved_cqt_hop(22050) == 512
        assert cfg.resolved_cqt_hop(44100) == 1024

    def test_raw_view_is_a_column(self) -> None:
        waveform = _tone(200.0, 0.5, 8000)
        assert extract_view(waveform, ViewKind.RAW).shape == (4000, 1)

    def test_wrong_config_kind(self) -> None:
        with pytest.raises(InvalidArgumentError):
            mel_spectrogram(_silence(1.0, 16000), SpectrogramConfig(view_kind=ViewKind.CQT))

    def test_too_short_for_window(self) -> None:
        with pytest.raises(SignalTooShortError):
            mel_spectrogram(_silence(0.01, 16000), SpectrogramConfig(view_kind=ViewKind.MEL))


class TestSpectrogramValues:
    @pytest.mark.parametrize("view", [ViewKind.MEL, ViewKind.GAMMATONE, ViewKind.CQT])
    def test_silence_hits_log_floor(self, view: ViewKind) -> None:
        matrix = extract_view(_silence(2.0, 22050), view)
        np.testing.assert_allclose(matrix, np.log(LOG_FLOOR))

    def test_mel_peak_band_at_1khz(self) -> None:
        cfg = SpectrogramConfig(view_kind=ViewKind.MEL)
        spec = mel_spectrogram(_tone(1000.0, 2.0, 16000), cfg)
        bank = mel_filterbank(16000, cfg.fft_size(16000), cfg.n_bands)
        expected = int(np.argmax(mel_weight_at(bank, 1000.0)))
        assert int(np.argmax(spec.values.mean(axis=0))) == expected

    def test_gammatone_peak_near_tone(self) -> None:
        cfg = SpectrogramConfig(view_kind=ViewKind.GAMMATONE)
        spec = gammatone_spectrogram(_tone(2000.0, 1.0, 16000), cfg)
        centers = gammatone_filterbank(16000, cfg.fft_size(16000), cfg.n_bands).center_freqs
        nearest = int(np.argmin(np.abs(centers - 2000.0)))
        assert abs(int(np.argmax(spec.values.mean(axis=0))) - nearest) <= 1

    def test_cqt_peak_at_bin_center(self) -> None:
        cfg = SpectrogramConfig(view_kind=ViewKind.CQT)
        centers = cqt_kernel(22050, cfg.n_bands, cfg.cqt_bins_per_octave).bank.center_freqs
        target = 30
        spec = cqt_spectrogram(_tone(float(centers[target]), 3.0, 22050), cfg)
        middle = spec.values[10:-10]
        assert int(np.argmax(middle.mean(axis=0))) == target


# =============================================================================
# Segmentation
# =============================================================================


class TestSegmentation:
    @pytest.mark.parametrize(
        ("duration", "expected"),
        [(0.2, 1), (1.0, 1), (2.5, 3), (4.49, 4), (30.0, 30)],
    )
    def test_segments_for_duration(self, duration: float, expected: int) -> None:
        assert segments_for_duration(duration) == expected

    def test_offsets_span_the_clip(self) -> None:
        np.testing.assert_array_equal(segment_offsets(100, 10, 3), [0, 45, 90])

    def test_infer_mode_count_and_length(self) -> None:
        data = np.arange(300.0).reshape(150, 2)
        spec = SegmentSpec(view=ViewKind.MEL, length=20)
        pieces = segment(data, spec, "infer", duration=3.0)
        assert len(pieces) == 3
        assert all(p.shape == (20, 2) for p in pieces)
        np.testing.assert_array_equal(pieces[-1], data[130:150])

    def test_train_mode_position(self) -> None:
        data = np.arange(50.0).reshape(50, 1)
        spec = SegmentSpec(view=ViewKind.RAW, length=10)
        (start,) = segment(data, spec, "train", position=0.0)
        (end,) = segment(data, spec, "train", position=1.0)
        assert start[0, 0] == 0.0
        assert end[-1, 0] == 49.0

    def test_train_mode_draws_from_rng(self) -> None:
        data = np.arange(50.0).reshape(50, 1)
        spec = SegmentSpec(view=ViewKind.RAW, length=10)
        first = segment(data, spec, "train", rng=np.random.default_rng(3))
        second = segment(data, spec, "train", rng=np.random.default_rng(3))
        np.testing.assert_array_equal(first[0], second[0])

    def test_too_short(self) -> None:
        spec = SegmentSpec(view=ViewKind.MEL, length=75)
        with pytest.raises(SignalTooShortError) as exc_info:
            segment(np.zeros((40, 64)), spec, "infer", n_segments=2)
        assert exc_info.value.required == 75

    def test_infer_needs_a_count(self) -> None:
        spec = SegmentSpec(view=ViewKind.MEL, length=5)
        with pytest.raises(InvalidArgumentError):
            segment(np.zeros((10, 4)), spec, "infer")
