"""Hard clipping at a fraction of the signal peak."""

from typing import ClassVar

import numpy as np

from urgentkit.core.audio import AudioSignal
from urgentkit.core.errors import EmptyAudioError
from urgentkit.degrade.step import ClippingParams, DegradationStep, DistortionKind
from urgentkit.distortions.base import DistortionOutput, DistortionResources, IDistortion


def clip_at(signal: AudioSignal, threshold: float) -> AudioSignal:
    """Limit samples to +/- threshold; idempotent for a fixed threshold."""
    if threshold < 0.0:
        raise ValueError(f"threshold must be non-negative, got {threshold}")
    if threshold == 0.0:
        return signal
    return signal.with_samples(np.clip(signal.samples, -threshold, threshold))


def clip(signal: AudioSignal, ratio: float) -> AudioSignal:
    """Limit samples to +/- ratio * max|signal|; an all-zero signal passes through."""
    if not 0.0 < ratio <= 1.0:
        raise ValueError(f"ratio must be in (0, 1], got {ratio}")
    if len(signal) == 0:
        raise EmptyAudioError("cannot clip an empty signal")

    return clip_at(signal, ratio * float(np.max(np.abs(signal.samples))))


class Clipping(IDistortion):
    kind: ClassVar[DistortionKind] = DistortionKind.CLIPPING

    @classmethod
    def _apply_original(
        cls, signal: AudioSignal, step: DegradationStep, resources: DistortionResources
    ) -> DistortionOutput:
        if not isinstance(step.params, ClippingParams):
            raise TypeError(f"expected ClippingParams, got {type(step.params).__name__}")
        return DistortionOutput(signal=clip(signal, step.params.ratio))
