from collections.abc import Callable

import numpy as np
import pytest
from scipy import signal as sps

from urgentkit.core.audio import AudioSignal, WavEncoding
from urgentkit.distortions.base import CodecTemplate

SpeechFactory = Callable[..., AudioSignal]

# Copies the encoder input through unchanged; float32 hand-off makes it bit-exact
IDENTITY_CODEC = CodecTemplate(
    encode="cp {in} {out}", decode="cp {in} {out}", extension="wav", input_encoding=WavEncoding.FLOAT32
)


def make_speech(rate_hz: int = 16000, duration_s: float = 3.0, seed: int = 0, peak: float = 0.5) -> AudioSignal:
    """Harmonic signal with a gliding pitch, syllable-rate modulation and short pauses."""
    rng = np.random.default_rng(seed)
    num_samples = round(rate_hz * duration_s)
    t = np.arange(num_samples) / rate_hz
    f0 = 110.0 + 30.0 * rng.random() + 20.0 * np.sin(2 * np.pi * 0.5 * t)
    phase = 2 * np.pi * np.cumsum(f0) / rate_hz
    voiced = np.zeros(num_samples)
    for k in range(1, 30):
        if k * 160.0 >= rate_hz / 2:
            break
        voiced += np.sin(k * phase + rng.uniform(0, 2 * np.pi)) / k
    syllables = np.square(np.sin(2 * np.pi * 2.0 * t + rng.uniform(0, np.pi)))
    pauses = (np.sin(2 * np.pi * 0.4 * t) > -0.7).astype(np.float64)
    samples = (voiced + 0.05 * rng.standard_normal(num_samples)) * syllables * pauses
    samples *= peak / np.max(np.abs(samples))
    return AudioSignal(samples=samples, rate_hz=rate_hz)


def make_noise(rate_hz: int = 16000, duration_s: float = 3.0, seed: int = 1, scale: float = 0.1) -> AudioSignal:
    rng = np.random.default_rng(seed)
    return AudioSignal(samples=scale * rng.standard_normal(round(rate_hz * duration_s)), rate_hz=rate_hz)


def make_lowpassed_noise(rate_hz: int, cutoff_hz: float, duration_s: float = 2.0, seed: int = 0) -> AudioSignal:
    """White noise through a steep elliptic low-pass."""
    rng = np.random.default_rng(seed)
    sos = sps.ellip(8, 0.1, 90, cutoff_hz, btype="low", fs=rate_hz, output="sos")
    samples = sps.sosfilt(sos, rng.standard_normal(round(rate_hz * duration_s)))
    return AudioSignal(samples=0.2 * samples / np.max(np.abs(samples)), rate_hz=rate_hz)


def make_rir(rate_hz: int = 16000, duration_s: float = 0.2, seed: int = 3) -> AudioSignal:
    """Exponentially decaying noise tail behind a unit direct path at 2 ms."""
    rng = np.random.default_rng(seed)
    num_samples = round(rate_hz * duration_s)
    samples = 0.1 * rng.standard_normal(num_samples) * np.exp(-np.arange(num_samples) / (0.03 * rate_hz))
    direct = round(0.002 * rate_hz)
    samples[:direct] = 0.0
    samples[direct] = 1.0
    return AudioSignal(samples=samples, rate_hz=rate_hz)


@pytest.fixture
def speech() -> SpeechFactory:
    return make_speech


@pytest.fixture
def noise() -> SpeechFactory:
    return make_noise
