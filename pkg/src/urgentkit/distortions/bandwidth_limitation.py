"""Bandwidth limitation by resampling down to a lower rate and back up."""

from typing import ClassVar

from urgentkit.core.audio import AudioSignal, is_challenge_rate
from urgentkit.core.resample import resample
from urgentkit.degrade.step import BandwidthLimitationParams, DegradationStep, DistortionKind
from urgentkit.distortions.base import DistortionOutput, DistortionResources, IDistortion


def bandlimit(signal: AudioSignal, target_hz: int) -> AudioSignal:
    """Remove content above target_hz / 2 while keeping the rate and length of the signal."""
    if target_hz >= signal.rate_hz:
        raise ValueError(f"target_hz ({target_hz}) must be below the signal rate ({signal.rate_hz})")
    if not is_challenge_rate(target_hz):
        raise ValueError(f"target_hz must be a challenge sampling rate, got {target_hz}")

    restored = resample(resample(signal, target_hz), signal.rate_hz)
    return restored.fit_length(len(signal))


class BandwidthLimitation(IDistortion):
    kind: ClassVar[DistortionKind] = DistortionKind.BANDWIDTH_LIMITATION

    @classmethod
    def _apply_original(
        cls, signal: AudioSignal, step: DegradationStep, resources: DistortionResources
    ) -> DistortionOutput:
        if not isinstance(step.params, BandwidthLimitationParams):
            raise TypeError(f"expected BandwidthLimitationParams, got {type(step.params).__name__}")
        return DistortionOutput(signal=bandlimit(signal, step.params.target_hz))
