"""Application of a degradation chain to clean speech.

Steps run in canonical order (reverberation, noise, clipping, bandwidth limitation, codec,
packet loss). Every step records its parameters, seed, realized gain and any external
commands in a ChainMetadata record, which is written as one JSON line per utterance.
"""

import logging
from typing import NamedTuple

from pydantic import BaseModel, Field

from urgentkit.core.audio import AudioSignal
from urgentkit.core.errors import ConfigurationError, StepError
from urgentkit.degrade.step import DegradationChain, DegradationStep, DistortionKind
from urgentkit.distortions.additive_noise import AdditiveNoise
from urgentkit.distortions.bandwidth_limitation import BandwidthLimitation
from urgentkit.distortions.base import DistortionOutput, DistortionResources, IDistortion
from urgentkit.distortions.clipping import Clipping
from urgentkit.distortions.codec import Codec
from urgentkit.distortions.packet_loss import PacketLoss
from urgentkit.distortions.reverberation import Reverberation
from urgentkit.distortions.wind_noise import WIND_NOISE_MODEL, WindNoise

logger = logging.getLogger(__name__)


class ChainMetadata(BaseModel):
    """Provenance of one degraded utterance."""

    utterance_id: str = Field(description="Utterance identifier")
    steps: list[DegradationStep] = Field(description="Applied steps with parameters and seeds")
    realized_snr_db: float | None = Field(default=None, description="Measured SNR of the noise step")
    gains: dict[str, float] = Field(default_factory=dict, description="Realized gain per step kind")
    seeds: dict[str, int] = Field(default_factory=dict, description="Seed per step kind")
    commands: list[str] = Field(default_factory=list, description="External commands in execution order")
    output_rate_hz: int = Field(description="Sampling rate of degraded and reference signals")
    notes: dict[str, float] = Field(default_factory=dict, description="Other per-step measurements")
    wind_noise_model: str | None = Field(default=None, description="Set when synthetic wind noise was used")
    resources: dict[str, str] = Field(default_factory=dict, description="Ids of the noise and RIR resources used, if any")


class ChainResult(NamedTuple):
    degraded: AudioSignal
    reference: AudioSignal
    metadata: ChainMetadata


def get_distortion(kind: DistortionKind) -> type[IDistortion]:
    """Return the distortion class implementing `kind`."""
    match kind:
        case DistortionKind.ADDITIVE_NOISE:
            return AdditiveNoise
        case DistortionKind.WIND_NOISE:
            return WindNoise
        case DistortionKind.REVERBERATION:
            return Reverberation
        case DistortionKind.CLIPPING:
            return Clipping
        case DistortionKind.BANDWIDTH_LIMITATION:
            return BandwidthLimitation
        case DistortionKind.CODEC:
            return Codec
        case DistortionKind.PACKET_LOSS:
            return PacketLoss
        case _:
            raise NotImplementedError(f"Distortion kind {kind} is not supported")


def check_resources(chain: DegradationChain, resources: DistortionResources) -> None:
    """Raise ConfigurationError if a step of the chain lacks its resource."""
    missing = []
    for step in chain.steps:
        if step.kind == DistortionKind.ADDITIVE_NOISE and resources.noise is None:
            missing.append("noise signal")
        elif step.kind == DistortionKind.REVERBERATION and resources.rir is None:
            missing.append("RIR signal")
        elif step.kind == DistortionKind.CODEC:
            codec_id = getattr(step.params, "codec_id", "")
            if codec_id not in resources.codec_templates:
                missing.append(f"command template for codec {codec_id!r}")
    if missing:
        raise ConfigurationError(f"{chain.utterance_id}: missing resource(s): {', '.join(missing)}")


def apply_chain(clean: AudioSignal, chain: DegradationChain, resources: DistortionResources) -> ChainResult:
    """Degrade `clean` with every step of `chain`.

    The reference is the clean speech (or the early-reflection target when reverberation runs
    in "early" mode), at the rate and length of the degraded signal.
    """
    check_resources(chain, resources)

    degraded = clean
    reference = clean
    metadata = ChainMetadata(utterance_id=chain.utterance_id, steps=chain.steps, output_rate_hz=clean.rate_hz)
    for step in chain.steps:
        try:
            output: DistortionOutput = get_distortion(step.kind).apply(degraded, step, resources)
        except Exception as e:
            raise StepError(chain.utterance_id, step.kind, e) from e

        degraded = output.signal
        if output.reference is not None:
            reference = output.reference
        metadata.seeds[step.kind] = step.seed
        if output.gain is not None:
            metadata.gains[step.kind] = output.gain
        if output.realized_snr_db is not None:
            metadata.realized_snr_db = output.realized_snr_db
        metadata.commands.extend(output.commands)
        metadata.notes.update({f"{step.kind}.{name}": value for name, value in output.notes.items()})
        if step.kind == DistortionKind.WIND_NOISE:
            metadata.wind_noise_model = WIND_NOISE_MODEL
        logger.debug("%s: applied %s", chain.utterance_id, step.kind)

    reference = reference.fit_length(len(degraded))
    return ChainResult(degraded=degraded, reference=reference, metadata=metadata)
