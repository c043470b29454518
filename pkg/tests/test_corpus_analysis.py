import numpy as np
import pytest

from urgentkit.core.audio import AudioSignal
from urgentkit.corpus.analysis import effective_bandwidth, lowest_covering_sf, vad_speech_ratio

from conftest import SpeechFactory
from conftest import make_lowpassed_noise as lowpassed_noise


class TestEffectiveBandwidth:
    """Tests for effective_bandwidth."""

    @pytest.mark.parametrize("cutoff_hz", [3000.0, 6500.0, 12000.0])
    def test_lowpassed_noise(self, cutoff_hz: float) -> None:
        """Test that the bandwidth of low-passed noise sits just above the cutoff."""
        bandwidth = effective_bandwidth(lowpassed_noise(48000, cutoff_hz))
        assert cutoff_hz - 100 <= bandwidth <= cutoff_hz * 1.1

    def test_full_band(self) -> None:
        """Test that white noise reaches the Nyquist frequency."""
        white = AudioSignal(samples=np.random.default_rng(0).standard_normal(16000), rate_hz=16000)
        assert effective_bandwidth(white) >= 7800

    def test_silence(self) -> None:
        """Test that silence has zero bandwidth."""
        assert effective_bandwidth(AudioSignal(samples=np.zeros(8000), rate_hz=16000)) == 0.0

    def test_too_short(self) -> None:
        """Test that less than half a second of audio is rejected."""
        with pytest.raises(ValueError, match="at least 0.5 s"):
            effective_bandwidth(AudioSignal(samples=np.ones(7999), rate_hz=16000))


class TestLowestCoveringSf:
    """Tests for lowest_covering_sf."""

    @pytest.mark.parametrize(
        ("bandwidth_hz", "rate_hz"),
        [(3500.0, 8000), (7500.0, 16000), (10000.0, 22050), (11000.0, 24000), (15000.0, 32000), (23000.0, 48000)],
    )
    def test_examples(self, bandwidth_hz: float, rate_hz: int) -> None:
        """Test the chosen rate for a range of bandwidths."""
        assert lowest_covering_sf(bandwidth_hz) == rate_hz

    def test_guard_band(self) -> None:
        """Test that a bandwidth at the Nyquist frequency needs the next rate."""
        assert lowest_covering_sf(4000.0) == 16000

    def test_above_every_rate(self) -> None:
        """Test that bandwidths beyond every rate map to 48 kHz."""
        assert lowest_covering_sf(30000.0) == 48000

    def test_non_positive(self) -> None:
        """Test that the bandwidth must be positive."""
        with pytest.raises(ValueError, match="positive"):
            lowest_covering_sf(0.0)


class TestVadSpeechRatio:
    """Tests for vad_speech_ratio."""

    def test_continuous_noise_is_active(self) -> None:
        """Test that stationary noise is active throughout."""
        activity = vad_speech_ratio(lowpassed_noise(16000, 4000.0))
        assert activity.ratio == 1.0
        assert activity.active_s == pytest.approx(1.98, abs=0.02)

    def test_mostly_silent(self, speech: SpeechFactory) -> None:
        """Test that one second of speech in four seconds of silence gives a low ratio."""
        samples = np.zeros(64000)
        samples[16000:32000] = speech(16000, 1.0).samples
        activity = vad_speech_ratio(AudioSignal(samples=samples, rate_hz=16000))
        assert activity.ratio < 0.3
        assert activity.active_s <= 1.05

    def test_tone_then_silence(self) -> None:
        """Test that a one second tone followed by nine seconds of silence is a tenth active."""
        samples = np.zeros(160000)
        samples[:16000] = 0.5 * np.sin(2 * np.pi * 440.0 * np.arange(16000) / 16000)
        activity = vad_speech_ratio(AudioSignal(samples=samples, rate_hz=16000))
        assert activity.ratio == pytest.approx(0.1, abs=0.02)

    def test_all_zero(self) -> None:
        """Test that digital silence is never active."""
        assert vad_speech_ratio(AudioSignal(samples=np.zeros(16000), rate_hz=16000)).ratio == 0.0

    def test_empty(self) -> None:
        """Test that an empty signal is rejected."""
        with pytest.raises(ValueError, match="empty"):
            vad_speech_ratio(AudioSignal(samples=np.zeros(0), rate_hz=16000))
