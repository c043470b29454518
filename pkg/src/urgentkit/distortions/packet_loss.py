"""Packet loss with a Gilbert-Elliott (two-state Markov) channel.

The channel starts in the good state. Before each following packet it moves good -> bad with
probability p_loss and bad -> good with probability q_recover; packets sent in the bad state
are lost. The long-run loss fraction is p_loss / (p_loss + q_recover).
"""

from typing import ClassVar, NamedTuple

import numpy as np
import numpy.typing as npt

from urgentkit.core.audio import AudioSignal, FloatArray
from urgentkit.degrade.step import DegradationStep, DistortionKind, PacketLossParams
from urgentkit.distortions.base import DistortionOutput, DistortionResources, IDistortion

RAMP_S = 0.001


class PacketLossResult(NamedTuple):
    output: AudioSignal
    loss_mask: npt.NDArray[np.bool_]  # True for each lost packet


def gilbert_elliott_mask(
    num_packets: int, p_loss: float, q_recover: float, rng: np.random.Generator
) -> npt.NDArray[np.bool_]:
    """Per-packet loss flags from the two-state chain."""
    if not 0.0 <= p_loss <= 1.0:
        raise ValueError(f"p_loss must be in [0, 1], got {p_loss}")
    if not 0.0 < q_recover <= 1.0:
        raise ValueError(f"q_recover must be in (0, 1], got {q_recover}")

    lost = np.zeros(num_packets, dtype=np.bool_)
    draws = rng.random(num_packets)
    bad = False
    for index in range(1, num_packets):
        bad = bool(draws[index] >= q_recover) if bad else bool(draws[index] < p_loss)
        lost[index] = bad
    return lost


def _raised_cosine(length: int) -> FloatArray:
    """Fade-in from just above 0 to just below 1."""
    return 0.5 * (1.0 - np.cos(np.pi * np.arange(1, length + 1) / (length + 1)))


def _packet_gain(loss_mask: npt.NDArray[np.bool_], packet: int, num_samples: int, ramp: int) -> FloatArray:
    """0 inside lost packets, 1 elsewhere, with ramps on the kept side of each loss boundary."""
    gain = np.repeat((~loss_mask).astype(np.float64), packet)[:num_samples]
    edges = np.diff(gain)
    fade_in = _raised_cosine(ramp)

    starts = np.flatnonzero(edges > 0) + 1  # first kept sample after a loss
    stops = np.flatnonzero(edges < 0) + 1  # first lost sample
    offsets = np.arange(ramp)
    if starts.size:
        index = (starts[:, None] + offsets).ravel()
        valid = index < num_samples
        np.minimum.at(gain, index[valid], np.tile(fade_in, starts.size)[valid])
    if stops.size:
        index = (stops[:, None] - ramp + offsets).ravel()
        valid = index >= 0
        np.minimum.at(gain, index[valid], np.tile(fade_in[::-1], stops.size)[valid])
    return gain


def packet_loss(signal: AudioSignal, p_loss: float, q_recover: float, packet_ms: float, seed: int) -> PacketLossResult:
    """Zero lost packets of `signal`; returns the output and the per-packet loss mask."""
    if packet_ms <= 0:
        raise ValueError(f"packet_ms must be positive, got {packet_ms}")
    packet = max(1, round(packet_ms * signal.rate_hz / 1000))
    num_packets = -(-len(signal) // packet)

    loss_mask = gilbert_elliott_mask(num_packets, p_loss, q_recover, np.random.default_rng(seed))
    if not loss_mask.any():
        return PacketLossResult(output=signal, loss_mask=loss_mask)

    ramp = max(1, round(RAMP_S * signal.rate_hz))
    gain = _packet_gain(loss_mask, packet, len(signal), ramp)
    return PacketLossResult(output=signal.with_samples(signal.samples * gain), loss_mask=loss_mask)


class PacketLoss(IDistortion):
    """Bursty packet loss at the step's channel parameters."""

    kind: ClassVar[DistortionKind] = DistortionKind.PACKET_LOSS

    @classmethod
    def _apply_original(
        cls, signal: AudioSignal, step: DegradationStep, resources: DistortionResources
    ) -> DistortionOutput:
        if not isinstance(step.params, PacketLossParams):
            raise TypeError(f"expected PacketLossParams, got {type(step.params).__name__}")
        params = step.params
        result = packet_loss(signal, params.p_loss, params.q_recover, params.packet_ms, step.seed)
        loss_fraction = float(np.mean(result.loss_mask)) if result.loss_mask.size else 0.0
        return DistortionOutput(signal=result.output, notes={"loss_fraction": loss_fraction})
