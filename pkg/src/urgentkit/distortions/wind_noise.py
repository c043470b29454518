"""Synthetic wind noise.

Wind is approximated by Gaussian noise through a resonant second-order low-pass (a
Chebyshev type I section, whose ripple gives the resonance peak) centred between 50 and
300 Hz, modulated by a slow gust envelope. This is not a physical wind simulator; chains
that use it are flagged with WIND_NOISE_MODEL in their metadata.
"""

from typing import ClassVar

import numpy as np
from scipy import signal as sps

from urgentkit.core.audio import AudioSignal
from urgentkit.degrade.step import DegradationStep, DistortionKind, WindNoiseParams
from urgentkit.distortions.additive_noise import measured_snr_db, mix_at_snr
from urgentkit.distortions.base import DistortionOutput, DistortionResources, IDistortion

WIND_NOISE_MODEL = "synthetic-resonant-gust"

RESONANCE_HZ = (50.0, 300.0)
RESONANCE_RIPPLE_DB = 6.0
ENVELOPE_RATE_HZ = 100
ENVELOPE_WARMUP_S = 4.0
ENVELOPE_FLOOR = 0.05
OUTPUT_PEAK = 0.9


def _gust_envelope(num_samples: int, rate_hz: int, gustiness: float, rng: np.random.Generator) -> np.ndarray:  # type: ignore[type-arg]
    """Slow positive envelope, built at a control rate and interpolated to the audio rate."""
    duration_s = num_samples / rate_hz
    num_control = int(np.ceil(duration_s * ENVELOPE_RATE_HZ)) + 2
    warmup = int(ENVELOPE_WARMUP_S * ENVELOPE_RATE_HZ)

    cutoff_hz = 0.5 + 2.0 * gustiness
    sos = sps.butter(2, cutoff_hz, btype="low", fs=ENVELOPE_RATE_HZ, output="sos")
    slow = sps.sosfilt(sos, rng.standard_normal(warmup + num_control))[warmup:]
    std = float(np.std(slow))
    if std > 0.0:
        slow = (slow - np.mean(slow)) / std

    # Modulation depth grows with gustiness
    depth = 0.25 + 0.75 * gustiness
    control = np.maximum(ENVELOPE_FLOOR, 1.0 + depth * slow)
    control_times = np.arange(num_control) / ENVELOPE_RATE_HZ
    return np.interp(np.arange(num_samples) / rate_hz, control_times, control)


def gen_wind_noise(duration_s: float, rate_hz: int, gustiness: float, seed: int) -> AudioSignal:
    """Generate wind-like noise, peak-normalized to 0.9."""
    if duration_s <= 0:
        raise ValueError(f"duration_s must be positive, got {duration_s}")
    if not 0.0 <= gustiness <= 1.0:
        raise ValueError(f"gustiness must be in [0, 1], got {gustiness}")

    num_samples = max(1, round(duration_s * rate_hz))
    carrier_seq, resonance_seq, envelope_seq = np.random.SeedSequence(seed).spawn(3)

    resonance_hz = float(np.random.default_rng(resonance_seq).uniform(*RESONANCE_HZ))
    sos = sps.cheby1(2, RESONANCE_RIPPLE_DB, resonance_hz, btype="low", fs=rate_hz, output="sos")
    carrier = sps.sosfilt(sos, np.random.default_rng(carrier_seq).standard_normal(num_samples))

    wind = carrier * _gust_envelope(num_samples, rate_hz, gustiness, np.random.default_rng(envelope_seq))
    max_abs = float(np.max(np.abs(wind)))
    if max_abs > 0.0:
        wind = wind * (OUTPUT_PEAK / max_abs)
    return AudioSignal(samples=wind, rate_hz=rate_hz)


class WindNoise(IDistortion):
    """Synthetic wind mixed at the step's SNR."""

    kind: ClassVar[DistortionKind] = DistortionKind.WIND_NOISE

    @classmethod
    def _apply_original(
        cls, signal: AudioSignal, step: DegradationStep, resources: DistortionResources
    ) -> DistortionOutput:
        if not isinstance(step.params, WindNoiseParams):
            raise TypeError(f"expected WindNoiseParams, got {type(step.params).__name__}")

        wind = gen_wind_noise(signal.duration_s, signal.rate_hz, step.params.gustiness, step.seed)
        result = mix_at_snr(signal, wind.fit_length(len(signal)), step.params.snr_db, step.seed)
        speech_part = signal.with_samples(signal.samples * result.rescale)
        return DistortionOutput(
            signal=result.mixture,
            gain=result.gain,
            realized_snr_db=measured_snr_db(speech_part, result.scaled_noise),
        )
