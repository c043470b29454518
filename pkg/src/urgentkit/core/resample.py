"""Polyphase windowed-sinc resampling.

The rate ratio is reduced to lowest terms (48000 -> 16000 is 1:3, 44100 -> 48000 is 160:147),
a Kaiser-windowed sinc prototype is designed with 64 taps on each side of the centre in every
polyphase branch, and scipy's polyphase filter applies it.
"""

from fractions import Fraction
from functools import lru_cache

import numpy as np
import numpy.typing as npt
from scipy import signal as sps

from urgentkit.core.audio import AudioSignal

KAISER_BETA = 14.77
TAPS_PER_PHASE = 64
MIN_TARGET_HZ = 4000


@lru_cache(maxsize=32)
def _prototype_filter(up: int, down: int) -> npt.NDArray[np.float64]:
    """Low-pass prototype at the interpolated rate, cutoff at the lower of the two Nyquist rates."""
    max_rate = max(up, down)
    num_taps = 2 * TAPS_PER_PHASE * max_rate + 1
    taps: npt.NDArray[np.float64] = sps.firwin(num_taps, 1.0 / max_rate, window=("kaiser", KAISER_BETA))
    taps.setflags(write=False)
    return taps


def rate_ratio(source_hz: int, target_hz: int) -> tuple[int, int]:
    """Return (up, down) in lowest terms for source_hz -> target_hz."""
    ratio = Fraction(target_hz, source_hz)
    return ratio.numerator, ratio.denominator


def resample(signal: AudioSignal, target_hz: int) -> AudioSignal:
    """Resample to target_hz; output length is round(len * target / source)."""
    if target_hz <= 0:
        raise ValueError(f"target_hz must be positive, got {target_hz}")
    if target_hz < MIN_TARGET_HZ:
        raise ValueError(f"target_hz must be at least {MIN_TARGET_HZ}, got {target_hz}")
    if target_hz == signal.rate_hz:
        return signal

    up, down = rate_ratio(signal.rate_hz, target_hz)
    out_length = round(len(signal) * target_hz / signal.rate_hz)
    if len(signal) == 0:
        return AudioSignal(samples=np.zeros(0), rate_hz=target_hz)

    # resample_poly scales the window array in place
    taps = _prototype_filter(up, down).copy()
    resampled = sps.resample_poly(signal.samples, up, down, window=taps)
    return AudioSignal(samples=resampled, rate_hz=target_hz).fit_length(out_length)
