"""Additive noise mixed at a target SNR."""

import logging
from typing import ClassVar, NamedTuple

import numpy as np

from urgentkit.core.audio import AudioSignal, FloatArray, peak, signal_power
from urgentkit.core.errors import ConfigurationError, RateMismatchError, SilentSignalError
from urgentkit.degrade.step import AdditiveNoiseParams, DegradationStep, DistortionKind
from urgentkit.distortions.base import DistortionOutput, DistortionResources, IDistortion

logger = logging.getLogger(__name__)

# Peak a clipping mixture is rescaled to
RESCUE_PEAK = 0.99


class MixResult(NamedTuple):
    mixture: AudioSignal
    scaled_noise: AudioSignal
    gain: float  # Noise gain, including any peak rescue
    rescale: float  # Peak rescue factor applied to the whole mixture (1.0 if none)


def fit_noise(noise: FloatArray, length: int, rng: np.random.Generator) -> FloatArray:
    """Tile (circularly, from a random offset) or excerpt noise to `length` samples."""
    if noise.shape[0] < length:
        offset = int(rng.integers(0, noise.shape[0]))
        return noise[(np.arange(length) + offset) % noise.shape[0]]
    if noise.shape[0] > length:
        offset = int(rng.integers(0, noise.shape[0] - length + 1))
        return noise[offset : offset + length]
    return noise


def rescue_peak(samples: FloatArray) -> float:
    """Factor that brings the peak down to RESCUE_PEAK, or 1.0 if the peak is within [-1, 1]."""
    max_abs = float(np.max(np.abs(samples))) if samples.size else 0.0
    if max_abs <= 1.0:
        return 1.0
    logger.warning("Peak %.3f exceeds full scale; rescaling to %.2f", max_abs, RESCUE_PEAK)
    return RESCUE_PEAK / max_abs


def mix_at_snr(speech: AudioSignal, noise: AudioSignal, snr_db: float, seed: int) -> MixResult:
    """Mix noise into speech so that 10*log10(P_speech / P_noise) equals snr_db.

    Powers are measured over the full speech length after the noise is fitted to it.
    """
    if speech.rate_hz != noise.rate_hz:
        raise RateMismatchError(f"speech is at {speech.rate_hz} Hz but noise is at {noise.rate_hz} Hz")
    if len(noise) == 0 or peak(noise) == 0.0:
        raise SilentSignalError("silent noise")
    if len(speech) == 0 or peak(speech) == 0.0:
        raise SilentSignalError("silent speech")

    rng = np.random.default_rng(seed)
    fitted = speech.with_samples(fit_noise(noise.samples, len(speech), rng))
    noise_power = signal_power(fitted)
    if noise_power == 0.0:
        raise SilentSignalError("silent noise")

    gain = float(np.sqrt(signal_power(speech) / (noise_power * 10.0 ** (snr_db / 10.0))))
    scaled = gain * fitted.samples
    mixture = speech.samples + scaled

    rescale = rescue_peak(mixture)
    return MixResult(
        mixture=speech.with_samples(mixture * rescale),
        scaled_noise=speech.with_samples(scaled * rescale),
        gain=gain * rescale,
        rescale=rescale,
    )


def measured_snr_db(speech: AudioSignal, scaled_noise: AudioSignal) -> float:
    return float(10.0 * np.log10(signal_power(speech) / signal_power(scaled_noise)))


class AdditiveNoise(IDistortion):
    """Recorded noise added at the step's SNR."""

    kind: ClassVar[DistortionKind] = DistortionKind.ADDITIVE_NOISE

    @classmethod
    def _apply_original(
        cls, signal: AudioSignal, step: DegradationStep, resources: DistortionResources
    ) -> DistortionOutput:
        if not isinstance(step.params, AdditiveNoiseParams):
            raise TypeError(f"expected AdditiveNoiseParams, got {type(step.params).__name__}")
        if resources.noise is None:
            raise ConfigurationError("missing resource: additive_noise needs a noise signal")

        result = mix_at_snr(signal, resources.noise, step.params.snr_db, step.seed)
        speech_part = signal.with_samples(signal.samples * result.rescale)
        return DistortionOutput(
            signal=result.mixture,
            gain=result.gain,
            realized_snr_db=measured_snr_db(speech_part, result.scaled_noise),
        )
