"""Extended short-time objective intelligibility (ESTOI).

Band envelopes come from pystoi's one-third octave filterbank, silent-frame removal and
STFT helpers. The row/column normalization is done here without pystoi's random dither
so that repeated runs give bit-identical scores.
"""

import numpy as np
from pystoi import utils as stoi_utils

from urgentkit.core.audio import AudioSignal, FloatArray
from urgentkit.core.resample import resample
from urgentkit.metrics.signal import align_pair

FS = 10000
FRAME = 256
NFFT = 512
NUM_BANDS = 15
MIN_FREQ = 150
SEGMENT = 30
DYN_RANGE_DB = 40
MIN_ACTIVE_S = 1.0
EPS = np.finfo(np.float64).eps

_OCTAVE_BANDS, _ = stoi_utils.thirdoct(FS, NFFT, NUM_BANDS, MIN_FREQ)


def _band_envelopes(samples: FloatArray) -> FloatArray:
    """One-third octave band magnitudes, shape (bands, frames)."""
    spectrum = stoi_utils.stft(samples, FRAME, NFFT, overlap=2).transpose()
    return np.asarray(np.sqrt(_OCTAVE_BANDS @ np.square(np.abs(spectrum))), dtype=np.float64)


def _segments(envelopes: FloatArray) -> FloatArray:
    """Overlapping SEGMENT-frame windows, shape (segments, bands, SEGMENT)."""
    windows = np.lib.stride_tricks.sliding_window_view(envelopes, SEGMENT, axis=1)
    return np.asarray(np.moveaxis(windows, 1, 0), dtype=np.float64)


def _row_col_normalize(segments: FloatArray) -> FloatArray:
    """Zero-mean, unit-norm rows (over time), then columns (over bands)."""
    rows = segments - np.mean(segments, axis=-1, keepdims=True)
    rows = rows / (np.linalg.norm(rows, axis=-1, keepdims=True) + EPS)
    cols = rows - np.mean(rows, axis=-2, keepdims=True)
    return cols / (np.linalg.norm(cols, axis=-2, keepdims=True) + EPS)


def estoi(reference: AudioSignal, estimate: AudioSignal) -> float:
    """ESTOI score in [-1, 1]; both signals need at least 1 s left after silent-frame removal."""
    ref, est = align_pair(reference, estimate)
    ref_10k = resample(reference.with_samples(ref), FS).samples
    est_10k = resample(estimate.with_samples(est), FS).samples

    ref_active, est_active = stoi_utils.remove_silent_frames(ref_10k, est_10k, DYN_RANGE_DB, FRAME, FRAME // 2)
    if ref_active.shape[0] < MIN_ACTIVE_S * FS:
        raise ValueError(
            f"estoi needs {MIN_ACTIVE_S} s of speech-active audio, got {ref_active.shape[0] / FS:.2f} s"
        )

    ref_segments = _segments(_band_envelopes(ref_active))
    est_segments = _segments(_band_envelopes(est_active))
    if ref_segments.shape[0] == 0:
        raise ValueError("estoi: not enough frames for one segment")

    products = _row_col_normalize(ref_segments) * _row_col_normalize(est_segments)
    return float(np.sum(products) / (SEGMENT * ref_segments.shape[0]))
