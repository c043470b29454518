"""Reverberation by convolution with a room impulse response.

The convolution is aligned so that the strongest RIR tap (the direct path) lands at lag 0,
which keeps the speech at its original timing. The metric reference is either the dry
speech or, in "early" mode, the speech convolved with the first 50 ms of the RIR.
"""

from typing import ClassVar, NamedTuple

import numpy as np
from scipy import signal as sps

from urgentkit.core.audio import AudioSignal, FloatArray
from urgentkit.core.errors import ConfigurationError, RateMismatchError, SilentSignalError
from urgentkit.degrade.step import DegradationStep, DistortionKind, ReferenceMode, ReverberationParams
from urgentkit.distortions.additive_noise import rescue_peak
from urgentkit.distortions.base import DistortionOutput, DistortionResources, IDistortion

EARLY_BEFORE_S = 0.001
EARLY_AFTER_S = 0.050


class ReverbResult(NamedTuple):
    reverberant: AudioSignal
    reference: AudioSignal
    gain: float  # Peak rescue factor (1.0 if none)


def _aligned_convolution(speech: FloatArray, rir: FloatArray, lag: int) -> FloatArray:
    """Full convolution, read from `lag` for len(speech) samples."""
    # direct summation for short kernels, FFT otherwise
    full = sps.convolve(speech, rir, mode="full", method="auto")
    return full[lag : lag + speech.shape[0]]


def direct_path_index(rir: AudioSignal) -> int:
    """Index of the maximum-magnitude tap."""
    return int(np.argmax(np.abs(rir.samples)))


def convolve_rir(speech: AudioSignal, rir: AudioSignal) -> ReverbResult:
    """Convolve speech with rir; the reference is the dry speech."""
    if speech.rate_hz != rir.rate_hz:
        raise RateMismatchError(f"speech is at {speech.rate_hz} Hz but the RIR is at {rir.rate_hz} Hz")
    if len(rir) == 0 or not np.any(rir.samples):
        raise SilentSignalError("all-zero RIR")

    reverberant = _aligned_convolution(speech.samples, rir.samples, direct_path_index(rir))
    gain = rescue_peak(reverberant)
    return ReverbResult(reverberant=speech.with_samples(reverberant * gain), reference=speech, gain=gain)


def early_reflection_reference(speech: AudioSignal, rir: AudioSignal) -> AudioSignal:
    """Speech convolved with the RIR from 1 ms before to 50 ms after the direct path, same alignment."""
    peak_index = direct_path_index(rir)
    start = max(0, peak_index - round(EARLY_BEFORE_S * rir.rate_hz))
    stop = peak_index + round(EARLY_AFTER_S * rir.rate_hz) + 1
    early = rir.samples[start:stop]
    return speech.with_samples(_aligned_convolution(speech.samples, early, peak_index - start))


class Reverberation(IDistortion):
    """RIR convolution; in early mode the reference is replaced by the early-reflection target."""

    kind: ClassVar[DistortionKind] = DistortionKind.REVERBERATION

    @classmethod
    def _apply_original(
        cls, signal: AudioSignal, step: DegradationStep, resources: DistortionResources
    ) -> DistortionOutput:
        if not isinstance(step.params, ReverberationParams):
            raise TypeError(f"expected ReverberationParams, got {type(step.params).__name__}")
        if resources.rir is None:
            raise ConfigurationError("missing resource: reverberation needs an RIR signal")

        result = convolve_rir(signal, resources.rir)
        match step.params.reference_mode:
            case ReferenceMode.DRY:
                reference = None
            case ReferenceMode.EARLY:
                early = early_reflection_reference(signal, resources.rir)
                reference = early.with_samples(early.samples * result.gain)
            case _:
                raise NotImplementedError(f"Reference mode {step.params.reference_mode} is not supported")
        return DistortionOutput(signal=result.reverberant, reference=reference, gain=result.gain)
