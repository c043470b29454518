"""Intrusive signal metrics: SDR, log-spectral distance and mel cepstral distortion.

All metrics compare a reference with an estimate at the same rate. Signals of different
lengths are truncated to the shorter one, with a warning above 0.5 % mismatch.
"""

import logging
import warnings
from functools import lru_cache

import librosa
import numpy as np
import scipy.fft
from scipy import signal as sps

from urgentkit.core.audio import AudioSignal, FloatArray
from urgentkit.core.errors import RateMismatchError, SilentSignalError
from urgentkit.core.spectral import frame_signal, stft

logger = logging.getLogger(__name__)

LENGTH_TOLERANCE = 0.005
SDR_CAP_DB = 100.0
SDR_CAP_RATIO = 1e-20
POWER_FLOOR = 1e-10

LSD_FFT_SIZE = 2048
LSD_HOP = 512

MCD_FRAME_S = 0.025
MCD_HOP_S = 0.010
MCD_MEL_BANDS = 80
MCD_ORDER = 13
# 10 / ln(10) * sqrt(2), converting cepstral distance to dB
MCD_SCALE = 10.0 / np.log(10.0) * np.sqrt(2.0)


def align_pair(reference: AudioSignal, estimate: AudioSignal) -> tuple[FloatArray, FloatArray]:
    """Samples of both signals truncated to the shorter length."""
    if reference.rate_hz != estimate.rate_hz:
        raise RateMismatchError(f"reference is at {reference.rate_hz} Hz but estimate is at {estimate.rate_hz} Hz")
    length = min(len(reference), len(estimate))
    longest = max(len(reference), len(estimate))
    if longest and (longest - length) / longest > LENGTH_TOLERANCE:
        logger.warning("Length mismatch: reference %d vs estimate %d samples; truncating", len(reference), len(estimate))
    return reference.samples[:length], estimate.samples[:length]


def sdr(reference: AudioSignal, estimate: AudioSignal) -> float:
    """10*log10(sum x^2 / sum (x - x_hat)^2), capped at +100 dB."""
    ref, est = align_pair(reference, estimate)
    signal_energy = float(np.sum(np.square(ref)))
    if signal_energy == 0.0:
        raise SilentSignalError("sdr: silent reference")
    error_energy = float(np.sum(np.square(ref - est)))
    if error_energy < SDR_CAP_RATIO * signal_energy:
        return SDR_CAP_DB
    return min(SDR_CAP_DB, float(10.0 * np.log10(signal_energy / error_energy)))


def lsd(reference: AudioSignal, estimate: AudioSignal) -> float:
    """Mean over frames of the RMS (over bins) log power ratio in dB; STFT 2048/512 with Hann window."""
    ref, est = align_pair(reference, estimate)
    if ref.shape[0] < LSD_FFT_SIZE:
        raise ValueError(f"lsd needs at least {LSD_FFT_SIZE} samples, got {ref.shape[0]}")

    ref_power = np.maximum(stft(reference.with_samples(ref), LSD_FFT_SIZE, LSD_HOP).power, POWER_FLOOR)
    est_power = np.maximum(stft(estimate.with_samples(est), LSD_FFT_SIZE, LSD_HOP).power, POWER_FLOOR)
    log_ratio = 10.0 * np.log10(ref_power / est_power)
    return float(np.mean(np.sqrt(np.mean(np.square(log_ratio), axis=-1))))


@lru_cache(maxsize=16)
def _mel_basis(rate_hz: int, fft_size: int) -> FloatArray:
    """80-band mel filterbank up to Nyquist, without the filters that cover no FFT bin."""
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", UserWarning)
        basis = librosa.filters.mel(
            sr=rate_hz, n_fft=fft_size, n_mels=MCD_MEL_BANDS, fmin=0.0, fmax=rate_hz / 2, dtype=np.float64
        )
    basis = basis[np.sum(basis, axis=-1) > 0.0]
    basis.setflags(write=False)
    return basis


def mel_cepstrum(samples: FloatArray, rate_hz: int) -> FloatArray:
    """Cepstral coefficients c0..c13 of 25 ms frames every 10 ms (80-band mel, natural log, DCT-II)."""
    frame = round(MCD_FRAME_S * rate_hz)
    hop = round(MCD_HOP_S * rate_hz)
    if samples.shape[0] < frame:
        raise ValueError(f"mcd needs at least {frame} samples at {rate_hz} Hz, got {samples.shape[0]}")
    fft_size = 1 << (frame - 1).bit_length()

    window = sps.get_window("hann", frame, fftbins=False)
    power = np.square(np.abs(np.fft.rfft(frame_signal(samples, frame, hop) * window, n=fft_size, axis=-1)))
    log_mel = np.log(np.maximum(power @ _mel_basis(rate_hz, fft_size).T, POWER_FLOOR))
    return np.asarray(scipy.fft.dct(log_mel, type=2, norm="ortho", axis=-1)[:, : MCD_ORDER + 1], dtype=np.float64)


def mcd(reference: AudioSignal, estimate: AudioSignal) -> float:
    """Mean over frames of (10/ln 10) * sqrt(2 * sum_{d=1..13} (c_d - c_hat_d)^2); c0 is excluded."""
    ref, est = align_pair(reference, estimate)
    ref_ceps = mel_cepstrum(ref, reference.rate_hz)[:, 1:]
    est_ceps = mel_cepstrum(est, estimate.rate_hz)[:, 1:]
    distances = MCD_SCALE * np.sqrt(np.sum(np.square(ref_ceps - est_ceps), axis=-1))
    return float(np.mean(distances))
