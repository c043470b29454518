"""Signal analysis used to prepare a corpus: effective bandwidth and energy-based voice activity."""

from typing import NamedTuple

import numpy as np
from scipy import signal as sps

from urgentkit.core.audio import CHALLENGE_RATES, AudioSignal
from urgentkit.core.spectral import frame_signal

WELCH_FFT_SIZE = 4096
ROLLOFF_DB = 50.0
MIN_RUN_BINS = 3
MIN_BANDWIDTH_DURATION_S = 0.5
# Usable fraction of the Nyquist band
NYQUIST_GUARD = 0.98

VAD_FRAME_S = 0.030
VAD_HOP_S = 0.010
VAD_RELATIVE_DB = 30.0
VAD_ABSOLUTE_DBFS = -60.0
VAD_PERCENTILE = 95.0
ENERGY_FLOOR = 1e-20


class SpeechActivity(NamedTuple):
    ratio: float  # Active frames over all frames
    active_s: float  # Active frames times the frame hop


def effective_bandwidth(signal: AudioSignal) -> float:
    """Highest frequency (Hz) where the Welch PSD stays within 50 dB of its peak for 3 consecutive bins."""
    if signal.duration_s < MIN_BANDWIDTH_DURATION_S:
        raise ValueError(
            f"effective_bandwidth needs at least {MIN_BANDWIDTH_DURATION_S} s of audio, got {signal.duration_s:.3f} s"
        )
    nperseg = min(WELCH_FFT_SIZE, len(signal))
    freqs, psd = sps.welch(
        signal.samples, fs=signal.rate_hz, window="hann", nperseg=nperseg, noverlap=nperseg // 2, nfft=WELCH_FFT_SIZE
    )
    peak_psd = float(np.max(psd))
    if peak_psd <= 0.0:
        return 0.0

    above = psd >= peak_psd * 10.0 ** (-ROLLOFF_DB / 10.0)
    # Bins that end a run of MIN_RUN_BINS bins above the threshold
    run_lengths = np.convolve(above.astype(np.int64), np.ones(MIN_RUN_BINS, dtype=np.int64), "valid")
    run_ends = np.flatnonzero(run_lengths == MIN_RUN_BINS)
    if run_ends.size == 0:
        return float(freqs[int(np.argmax(psd))])
    return float(freqs[run_ends[-1] + MIN_RUN_BINS - 1])


def lowest_covering_sf(bandwidth_hz: float) -> int:
    """Smallest challenge rate whose guarded Nyquist band covers bandwidth_hz (48000 if none does)."""
    if bandwidth_hz <= 0:
        raise ValueError(f"bandwidth_hz must be positive, got {bandwidth_hz}")
    for rate in CHALLENGE_RATES:
        if bandwidth_hz <= 0.5 * rate * NYQUIST_GUARD:
            return rate
    return CHALLENGE_RATES[-1]


def vad_speech_ratio(signal: AudioSignal) -> SpeechActivity:
    """Energy VAD on 30 ms frames every 10 ms.

    A frame is active when its mean-square level is within 30 dB of the 95th-percentile frame
    level and above -60 dBFS.
    """
    if len(signal) == 0:
        raise ValueError("vad_speech_ratio of an empty signal")
    frame = max(1, round(VAD_FRAME_S * signal.rate_hz))
    hop = max(1, round(VAD_HOP_S * signal.rate_hz))

    energy = np.mean(np.square(frame_signal(signal.samples, frame, hop)), axis=-1)
    level_db = 10.0 * np.log10(np.maximum(energy, ENERGY_FLOOR))
    threshold = np.percentile(level_db, VAD_PERCENTILE) - VAD_RELATIVE_DB
    active = (level_db > threshold) & (level_db > VAD_ABSOLUTE_DBFS)

    num_active = int(np.count_nonzero(active))
    return SpeechActivity(ratio=num_active / active.size, active_s=num_active * hop / signal.rate_hz)
