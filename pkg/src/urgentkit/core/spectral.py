"""Framing and short-time Fourier transform shared by the spectral metrics."""

import numpy as np
import numpy.typing as npt
from numpy.lib.stride_tricks import sliding_window_view
from pydantic import BaseModel, ConfigDict, Field, PositiveInt
from scipy import signal as sps

from urgentkit.core.audio import AudioSignal

# Aliases accepted in addition to scipy window names
_WINDOW_ALIASES = {"rect": "boxcar", "rectangular": "boxcar"}


class SpectralFrames(BaseModel):
    """STFT frames (frame x bin) with the analysis parameters that produced them."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    frames: np.ndarray = Field(description="Complex spectra, shape (frames, fft_size // 2 + 1)")  # type: ignore[type-arg]
    fft_size: PositiveInt = Field(description="FFT length in samples")
    hop: PositiveInt = Field(description="Frame advance in samples")
    window: str = Field(description="Analysis window identifier")
    rate_hz: PositiveInt = Field(description="Sampling rate of the analysed signal")

    @property
    def power(self) -> npt.NDArray[np.float64]:
        """Squared magnitude of each bin."""
        return np.square(np.abs(self.frames))


def analysis_window(window: str, length: int) -> npt.NDArray[np.float64]:
    """Periodic (DFT-even) window of the given length, e.g. "hann" or "rect"."""
    name = _WINDOW_ALIASES.get(window, window)
    try:
        return np.asarray(sps.get_window(name, length, fftbins=True), dtype=np.float64)
    except ValueError as e:
        raise ValueError(f"Unknown window {window!r}") from e


def frame_signal(samples: npt.NDArray[np.float64], frame_length: int, hop: int) -> npt.NDArray[np.float64]:
    """Split into frames of frame_length every hop samples; short inputs are zero-padded to one frame."""
    if samples.shape[0] < frame_length:
        samples = np.pad(samples, (0, frame_length - samples.shape[0]))
    return sliding_window_view(samples, frame_length)[::hop]


def stft(signal: AudioSignal, fft_size: int, hop: int, window: str = "hann") -> SpectralFrames:
    """Short-time Fourier transform with frame count floor((len - fft_size) / hop) + 1."""
    if fft_size < 64 or fft_size & (fft_size - 1):
        raise ValueError(f"fft_size must be a power of two >= 64, got {fft_size}")
    if not 0 < hop <= fft_size:
        raise ValueError(f"hop must satisfy 0 < hop <= fft_size, got {hop}")

    frames = frame_signal(signal.samples, fft_size, hop) * analysis_window(window, fft_size)
    spectra = np.fft.rfft(frames, n=fft_size, axis=-1)
    return SpectralFrames(frames=spectra, fft_size=fft_size, hop=hop, window=window, rate_hz=signal.rate_hz)
