"""Mono audio container, WAV file I/O and power utilities.

AudioSignal holds float64 samples (nominal full scale [-1, 1]) and an integer sampling rate.
WAV files are read and written through soundfile; integer PCM is quantized here so that
rounding and saturation are deterministic and independent of the libsndfile build.
"""

import logging
import struct
from enum import StrEnum
from pathlib import Path
from typing import Any

import numpy as np
import numpy.typing as npt
import soundfile as sf
from pydantic import BaseModel, ConfigDict, Field, PositiveInt, field_validator

from urgentkit.core.errors import (
    ChannelCountError,
    EmptyAudioError,
    TruncatedFileError,
    UnsupportedEncodingError,
)

logger = logging.getLogger(__name__)

# Sampling frequencies accepted for pipeline inputs and outputs
CHALLENGE_RATES: tuple[int, ...] = (8000, 16000, 22050, 24000, 32000, 44100, 48000)

FloatArray = npt.NDArray[np.float64]


class WavEncoding(StrEnum):
    """Sample encoding of a written WAV file."""

    PCM16 = "pcm16"
    PCM24 = "pcm24"
    FLOAT32 = "float32"


_SUBTYPE_BITS: dict[str, int | None] = {"PCM_16": 16, "PCM_24": 24, "FLOAT": None}


class AudioSignal(BaseModel):
    """A mono signal: float64 samples and a sampling rate in Hz."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    samples: np.ndarray = Field(description="Sample amplitudes, nominal full scale [-1, 1]")  # type: ignore[type-arg]
    rate_hz: PositiveInt = Field(description="Sampling frequency in Hz")

    @field_validator("samples", mode="before")
    @classmethod
    def _as_float_vector(cls, value: Any) -> FloatArray:
        array = np.asarray(value, dtype=np.float64)
        if array.ndim != 1:
            raise ValueError(f"samples must be one-dimensional (mono), got shape {array.shape}")
        if not np.all(np.isfinite(array)):
            raise ValueError("samples must not contain NaN or infinite values")
        return array

    def __len__(self) -> int:
        return int(self.samples.shape[0])

    @property
    def duration_s(self) -> float:
        """Duration in seconds."""
        return len(self) / self.rate_hz

    def with_samples(self, samples: npt.ArrayLike) -> "AudioSignal":
        """Return a signal at the same rate carrying new samples."""
        return AudioSignal(samples=samples, rate_hz=self.rate_hz)

    def fit_length(self, length: int) -> "AudioSignal":
        """Trim or zero-pad at the tail to exactly `length` samples."""
        if length == len(self):
            return self
        if length < len(self):
            return self.with_samples(self.samples[:length])
        return self.with_samples(np.pad(self.samples, (0, length - len(self))))


def is_challenge_rate(rate_hz: int) -> bool:
    """Whether rate_hz is one of the challenge sampling frequencies."""
    return rate_hz in CHALLENGE_RATES


def _data_chunk_bounds(path: Path) -> tuple[int, int] | None:
    """Return (offset, declared size) of the RIFF data chunk, or None if the header is not RIFF/WAVE."""
    with path.open("rb") as stream:
        header = stream.read(12)
        if len(header) < 12 or header[:4] != b"RIFF" or header[8:12] != b"WAVE":
            return None
        while chunk := stream.read(8):
            if len(chunk) < 8:
                break
            chunk_id, size = struct.unpack("<4sI", chunk)
            if chunk_id == b"data":
                return stream.tell(), size
            stream.seek(size + (size & 1), 1)
    raise TruncatedFileError(f"{path}: no data chunk before end of file")


def read_wav(path: str | Path) -> AudioSignal:
    """Read a mono RIFF/WAVE file (PCM16, PCM24 or float32).

    Integer PCM is mapped to [-1, 1) by dividing by 2^(bits-1).
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"No such audio file: {path}")

    bounds = _data_chunk_bounds(path)
    if bounds is None:
        raise UnsupportedEncodingError(f"{path}: not a RIFF/WAVE file")
    offset, declared = bounds
    if offset + declared > path.stat().st_size:
        raise TruncatedFileError(
            f"{path}: data chunk declares {declared} bytes but only {path.stat().st_size - offset} are present"
        )
    try:
        info = sf.info(str(path))
    except sf.LibsndfileError as e:
        raise UnsupportedEncodingError(f"{path}: {e}") from e

    if info.format != "WAV" or info.subtype not in _SUBTYPE_BITS:
        raise UnsupportedEncodingError(f"{path}: unsupported encoding {info.format}/{info.subtype}")
    if info.channels != 1:
        raise ChannelCountError(f"{path}: expected 1 channel, found {info.channels}")

    if info.frames == 0 or declared == 0:
        raise EmptyAudioError(f"{path}: zero-length data chunk")

    samples, rate = sf.read(str(path), dtype="float64", always_2d=False)
    return AudioSignal(samples=samples, rate_hz=int(rate))


def write_wav(signal: AudioSignal, path: str | Path, encoding: WavEncoding = WavEncoding.FLOAT32) -> None:
    """Write a signal as a mono WAV file.

    float32 stores values exactly (for float32-representable samples); pcm16/pcm24 round to
    nearest and saturate at full scale. No dither is applied.
    """
    path = Path(path)
    if not path.parent.is_dir():
        raise FileNotFoundError(f"Directory does not exist: {path.parent}")
    samples = np.asarray(signal.samples, dtype=np.float64)
    if not np.all(np.isfinite(samples)):
        raise ValueError(f"Cannot write {path}: samples contain NaN or infinite values")

    match encoding:
        case WavEncoding.FLOAT32:
            sf.write(str(path), samples.astype(np.float32), signal.rate_hz, subtype="FLOAT", format="WAV")
        case WavEncoding.PCM16:
            sf.write(str(path), _quantize(samples, 16).astype(np.int16), signal.rate_hz, subtype="PCM_16", format="WAV")
        case WavEncoding.PCM24:
            # libsndfile takes the upper 24 bits of int32 input
            ints = _quantize(samples, 24).astype(np.int32) << 8
            sf.write(str(path), ints, signal.rate_hz, subtype="PCM_24", format="WAV")
        case _:
            raise NotImplementedError(f"Encoding {encoding} is not supported")


def _quantize(samples: FloatArray, bits: int) -> npt.NDArray[np.int64]:
    full_scale = 1 << (bits - 1)
    clipped = np.clip(np.rint(samples * full_scale), -full_scale, full_scale - 1)
    if np.any(np.abs(samples) >= 1.0):
        logger.debug("Saturating %d sample(s) at %d-bit full scale", int(np.sum(np.abs(samples) >= 1.0)), bits)
    return clipped.astype(np.int64)


def signal_power(signal: AudioSignal) -> float:
    """Mean-square power (1/N) * sum(x[n]^2), linear."""
    if len(signal) == 0:
        raise EmptyAudioError("signal_power of an empty signal")
    return float(np.mean(np.square(signal.samples)))


def peak(signal: AudioSignal) -> float:
    """Maximum absolute sample value."""
    if len(signal) == 0:
        raise EmptyAudioError("peak of an empty signal")
    return float(np.max(np.abs(signal.samples)))
