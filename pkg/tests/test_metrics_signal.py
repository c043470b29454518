import librosa
import numpy as np
import pytest

from urgentkit.core.audio import AudioSignal
from urgentkit.core.errors import RateMismatchError, SilentSignalError
from urgentkit.metrics.estoi import estoi
from urgentkit.metrics.signal import LSD_FFT_SIZE, LSD_HOP, SDR_CAP_DB, align_pair, lsd, mcd, sdr

from conftest import make_noise, make_speech


def _naive_lsd(reference: np.ndarray, estimate: np.ndarray) -> float:
    """Frame-by-frame log-spectral distance with explicit loops."""
    window = 0.5 - 0.5 * np.cos(2 * np.pi * np.arange(LSD_FFT_SIZE) / LSD_FFT_SIZE)
    distances = []
    for start in range(0, reference.shape[0] - LSD_FFT_SIZE + 1, LSD_HOP):
        ref = np.abs(np.fft.rfft(reference[start : start + LSD_FFT_SIZE] * window)) ** 2
        est = np.abs(np.fft.rfft(estimate[start : start + LSD_FFT_SIZE] * window)) ** 2
        ratio = 10 * np.log10(np.maximum(ref, 1e-10) / np.maximum(est, 1e-10))
        distances.append(np.sqrt(np.mean(ratio**2)))
    return float(np.mean(distances))


def _naive_mcd(reference: np.ndarray, estimate: np.ndarray, rate_hz: int) -> float:
    """Mel cepstral distortion with explicit per-frame filterbank and DCT loops."""
    frame = round(0.025 * rate_hz)
    hop = round(0.010 * rate_hz)
    fft_size = 1 << (frame - 1).bit_length()
    window = 0.5 - 0.5 * np.cos(2 * np.pi * np.arange(frame) / (frame - 1))
    basis = librosa.filters.mel(sr=rate_hz, n_fft=fft_size, n_mels=80, fmin=0.0, fmax=rate_hz / 2, dtype=np.float64)
    basis = basis[basis.sum(axis=1) > 0.0]
    bands = basis.shape[0]

    def cepstrum(frame_samples: np.ndarray) -> np.ndarray:
        power = np.abs(np.fft.rfft(frame_samples * window, n=fft_size)) ** 2
        log_mel = np.empty(bands)
        for band in range(bands):
            log_mel[band] = np.log(max(float(np.dot(basis[band], power)), 1e-10))
        coefficients = np.empty(14)
        for d in range(14):
            scale = np.sqrt(1.0 / bands) if d == 0 else np.sqrt(2.0 / bands)
            coefficients[d] = scale * sum(
                log_mel[n] * np.cos(np.pi * d * (2 * n + 1) / (2 * bands)) for n in range(bands)
            )
        return coefficients

    distances = []
    for start in range(0, reference.shape[0] - frame + 1, hop):
        ref = cepstrum(reference[start : start + frame])
        est = cepstrum(estimate[start : start + frame])
        distances.append(10 / np.log(10) * np.sqrt(2 * np.sum((ref[1:] - est[1:]) ** 2)))
    return float(np.mean(distances))


class TestIdentity:
    """Every metric at its best value for identical signals."""

    @pytest.mark.parametrize("seed", range(20))
    def test_identical_signals(self, seed: int) -> None:
        """Test SDR, LSD, MCD and ESTOI on a signal compared with itself."""
        signal = make_speech(16000, 3.0, seed=seed)
        assert sdr(signal, signal) == SDR_CAP_DB
        assert lsd(signal, signal) == 0.0
        assert mcd(signal, signal) == 0.0
        assert estoi(signal, signal) == pytest.approx(1.0, abs=1e-6)


class TestSdr:
    """Tests for sdr."""

    def test_half_amplitude(self) -> None:
        """Test that halving the estimate gives 20*log10(2) dB."""
        signal = make_speech(16000, 1.0)
        half = signal.with_samples(0.5 * signal.samples)
        assert sdr(signal, half) == pytest.approx(6.0206, abs=1e-4)

    @pytest.mark.parametrize("gain", [0.1, 0.25, 0.5, 0.9])
    def test_scaled_estimate(self, gain: float) -> None:
        """Test that sdr(x, g*x) is -20*log10(1 - g)."""
        signal = make_speech(16000, 1.0)
        scaled = signal.with_samples(gain * signal.samples)
        assert sdr(signal, scaled) == pytest.approx(-10 * np.log10((1 - gain) ** 2), abs=1e-6)

    def test_known_error(self) -> None:
        """Test an estimate with a known error energy."""
        reference = AudioSignal(samples=[1.0, 1.0, 1.0, 1.0], rate_hz=8000)
        estimate = AudioSignal(samples=[1.0, 1.0, 1.0, 0.0], rate_hz=8000)
        assert sdr(reference, estimate) == pytest.approx(10 * np.log10(4.0))

    def test_silent_reference(self) -> None:
        """Test that a silent reference is rejected."""
        silent = AudioSignal(samples=np.zeros(100), rate_hz=8000)
        with pytest.raises(SilentSignalError):
            sdr(silent, make_noise(8000, 100 / 8000))

    def test_rate_mismatch(self) -> None:
        """Test that the rates must match."""
        with pytest.raises(RateMismatchError):
            sdr(make_noise(8000, 0.1), make_noise(16000, 0.1))


class TestAlignPair:
    """Tests for align_pair."""

    def test_truncates_to_shorter(self, caplog: pytest.LogCaptureFixture) -> None:
        """Test truncation and the warning for large mismatches."""
        ref, est = align_pair(make_noise(8000, 1.0), make_noise(8000, 0.5))
        assert ref.shape == est.shape == (4000,)
        assert "Length mismatch" in caplog.text

    def test_small_mismatch_is_quiet(self, caplog: pytest.LogCaptureFixture) -> None:
        """Test that mismatches below 0.5 % are not reported."""
        align_pair(make_noise(8000, 1.0), make_noise(8000, 0.999))
        assert "Length mismatch" not in caplog.text


class TestLsd:
    """Tests for lsd."""

    def test_tenfold_gain(self) -> None:
        """Test that a 10x amplitude gives exactly 20 dB."""
        signal = make_noise(16000, 1.0)
        assert lsd(signal, signal.with_samples(10 * signal.samples)) == pytest.approx(20.0, abs=1e-9)

    @pytest.mark.parametrize("seed", range(10))
    def test_matches_naive(self, seed: int) -> None:
        """Test against a frame loop."""
        reference = make_speech(16000, 1.0, seed=seed)
        estimate = reference.with_samples(reference.samples + make_noise(16000, 1.0, seed=seed, scale=0.01).samples)
        expected = _naive_lsd(reference.samples, estimate.samples)
        assert lsd(reference, estimate) == pytest.approx(expected, rel=1e-9)

    def test_time_reversal(self) -> None:
        """Test that reversing both inputs leaves LSD unchanged when frames tile the signal exactly."""
        length = LSD_FFT_SIZE + 1 + LSD_HOP * 28
        reference = make_speech(16000, length / 16000)
        estimate = reference.with_samples(reference.samples + make_noise(16000, length / 16000, scale=0.05).samples)
        reversed_pair = (reference.with_samples(reference.samples[::-1]), estimate.with_samples(estimate.samples[::-1]))
        assert lsd(*reversed_pair) == pytest.approx(lsd(reference, estimate), abs=1e-6)

    def test_too_short(self) -> None:
        """Test that fewer samples than one frame are rejected."""
        short = make_noise(16000, 0.1)
        with pytest.raises(ValueError, match="at least 2048"):
            lsd(short, short)


class TestMcd:
    """Tests for mcd."""

    def test_gain_only_changes_c0(self) -> None:
        """Test that a constant gain leaves MCD at zero since c0 is excluded."""
        signal = make_noise(16000, 1.0)
        assert mcd(signal, signal.with_samples(2 * signal.samples)) == pytest.approx(0.0, abs=1e-9)

    def test_symmetric_and_positive(self) -> None:
        """Test that MCD is symmetric and positive for different signals."""
        reference = make_speech(16000, 1.0)
        estimate = reference.with_samples(reference.samples + make_noise(16000, 1.0, scale=0.05).samples)
        forward = mcd(reference, estimate)
        assert forward > 0.0
        assert forward == pytest.approx(mcd(estimate, reference))

    def test_grows_with_noise(self) -> None:
        """Test that more noise gives a larger distortion."""
        reference = make_speech(16000, 1.0)
        noise = make_noise(16000, 1.0, scale=1.0).samples
        values = [mcd(reference, reference.with_samples(reference.samples + scale * noise)) for scale in (0.001, 0.1)]
        assert values[0] < values[1]

    @pytest.mark.parametrize("rate_hz", [8000, 22050, 44100, 48000])
    def test_every_rate(self, rate_hz: int) -> None:
        """Test that MCD works at other challenge rates."""
        signal = make_speech(rate_hz, 0.5)
        assert mcd(signal, signal) == 0.0

    @pytest.mark.parametrize("seed", range(10))
    def test_matches_naive(self, seed: int) -> None:
        """Test against per-frame filterbank and DCT loops."""
        reference = make_speech(16000, 1.0, seed=seed)
        estimate = reference.with_samples(reference.samples + make_noise(16000, 1.0, seed=seed, scale=0.02).samples)
        expected = _naive_mcd(reference.samples, estimate.samples, 16000)
        assert mcd(reference, estimate) == pytest.approx(expected, abs=1e-6)

    def test_time_reversal(self) -> None:
        """Test that reversing both inputs leaves MCD unchanged when frames tile the signal exactly."""
        length = 400 + 160 * 95
        reference = make_speech(16000, length / 16000)
        estimate = reference.with_samples(reference.samples + make_noise(16000, length / 16000, scale=0.05).samples)
        reversed_pair = (reference.with_samples(reference.samples[::-1]), estimate.with_samples(estimate.samples[::-1]))
        assert mcd(*reversed_pair) == pytest.approx(mcd(reference, estimate), abs=1e-6)
