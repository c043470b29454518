import numpy as np
import pytest
from scipy import signal as sps

from urgentkit.core.audio import AudioSignal
from urgentkit.degrade.step import BandwidthLimitationParams, DegradationStep, DistortionKind
from urgentkit.distortions.bandwidth_limitation import BandwidthLimitation, bandlimit
from urgentkit.distortions.base import DistortionResources

from conftest import SpeechFactory


class TestBandlimit:
    """Tests for bandlimit."""

    def test_length_and_rate_preserved(self, speech: SpeechFactory) -> None:
        """Test that bandlimit keeps rate and length."""
        signal = speech(44100, 0.77)
        out = bandlimit(signal, 16000)
        assert out.rate_hz == 44100
        assert len(out) == len(signal)

    def test_stopband_attenuation(self) -> None:
        """Test at least 60 dB attenuation above 0.55 * target on white noise."""
        noise = AudioSignal(samples=np.random.default_rng(0).standard_normal(48000 * 2), rate_hz=48000)
        out = bandlimit(noise, 16000)
        freqs, psd = sps.welch(out.samples, fs=48000, nperseg=4096)
        passband = np.mean(psd[(freqs > 200) & (freqs < 7000)])
        stopband = np.max(psd[freqs > 0.55 * 16000])
        assert 10 * np.log10(passband / stopband) >= 60

    def test_second_pass_changes_little(self, speech: SpeechFactory) -> None:
        """Test that limiting twice at the same target changes energy by less than 0.5 dB."""
        once = bandlimit(speech(48000, 1.0), 16000)
        twice = bandlimit(once, 16000)
        ratio_db = 10 * np.log10(np.sum(twice.samples**2) / np.sum(once.samples**2))
        assert abs(ratio_db) < 0.5

    @pytest.mark.parametrize("target", [16000, 48000])
    def test_target_not_below_rate(self, target: int) -> None:
        """Test that the target must be below the signal rate."""
        with pytest.raises(ValueError, match="below"):
            bandlimit(AudioSignal(samples=np.zeros(100), rate_hz=16000), target)

    def test_target_must_be_challenge_rate(self) -> None:
        """Test that the target must be a challenge rate."""
        with pytest.raises(ValueError, match="challenge"):
            bandlimit(AudioSignal(samples=np.zeros(100), rate_hz=48000), 11025)

    def test_step(self, speech: SpeechFactory) -> None:
        """Test the BandwidthLimitation step."""
        signal = speech(48000, 0.5)
        step = DegradationStep(
            kind=DistortionKind.BANDWIDTH_LIMITATION, params=BandwidthLimitationParams(target_hz=8000)
        )
        output = BandwidthLimitation.apply(signal, step, DistortionResources())
        np.testing.assert_array_equal(output.signal.samples, bandlimit(signal, 8000).samples)
