"""Degradation steps and chains.

A DegradationStep is one parameterized distortion plus the seed that fixes its randomness.
A DegradationChain is the ordered list of steps realizing the distortion model for one utterance.
"""

from enum import StrEnum
from typing import Annotated, Literal, Self

from pydantic import BaseModel, Field, PositiveFloat, PositiveInt, model_validator

from urgentkit.core.seeding import UINT64_MAX

MAX_STEPS = 5


class DistortionKind(StrEnum):
    """Identifier of each distortion type."""

    ADDITIVE_NOISE = "additive_noise"
    WIND_NOISE = "wind_noise"
    REVERBERATION = "reverberation"
    CLIPPING = "clipping"
    BANDWIDTH_LIMITATION = "bandwidth_limitation"
    CODEC = "codec"
    PACKET_LOSS = "packet_loss"


# Acoustic effects come before capture and transmission effects
CANONICAL_ORDER: tuple[DistortionKind, ...] = (
    DistortionKind.REVERBERATION,
    DistortionKind.WIND_NOISE,
    DistortionKind.ADDITIVE_NOISE,
    DistortionKind.CLIPPING,
    DistortionKind.BANDWIDTH_LIMITATION,
    DistortionKind.CODEC,
    DistortionKind.PACKET_LOSS,
)


class ReferenceMode(StrEnum):
    """Target signal used as the metric reference when reverberation is applied."""

    DRY = "dry"  # Clean speech, full dereverberation expected
    EARLY = "early"  # Direct path plus 50 ms of early reflections


class AdditiveNoiseParams(BaseModel):
    kind: Literal["additive_noise"] = "additive_noise"
    snr_db: float = Field(description="Target speech-to-noise ratio in dB")


class WindNoiseParams(BaseModel):
    kind: Literal["wind_noise"] = "wind_noise"
    snr_db: float = Field(description="Target speech-to-wind ratio in dB")
    gustiness: float = Field(ge=0.0, le=1.0, description="Depth and speed of the gust envelope")


class ReverberationParams(BaseModel):
    kind: Literal["reverberation"] = "reverberation"
    reference_mode: ReferenceMode = Field(default=ReferenceMode.DRY, description="Reference convention")


class ClippingParams(BaseModel):
    kind: Literal["clipping"] = "clipping"
    ratio: float = Field(gt=0.0, le=1.0, description="Threshold as a fraction of the signal peak")


class BandwidthLimitationParams(BaseModel):
    kind: Literal["bandwidth_limitation"] = "bandwidth_limitation"
    target_hz: PositiveInt = Field(description="Effective sampling rate after limitation")


class CodecParams(BaseModel):
    kind: Literal["codec"] = "codec"
    codec_id: str = Field(description="Key into the configured codec command templates")
    bitrate_kbps: PositiveInt = Field(description="Encoder bitrate in kbit/s")


class PacketLossParams(BaseModel):
    kind: Literal["packet_loss"] = "packet_loss"
    p_loss: float = Field(ge=0.0, le=1.0, description="Good-to-bad transition probability")
    q_recover: float = Field(gt=0.0, le=1.0, description="Bad-to-good transition probability")
    packet_ms: PositiveFloat = Field(default=20.0, description="Packet duration in milliseconds")


StepParams = Annotated[
    AdditiveNoiseParams
    | WindNoiseParams
    | ReverberationParams
    | ClippingParams
    | BandwidthLimitationParams
    | CodecParams
    | PacketLossParams,
    Field(discriminator="kind"),
]


class DegradationStep(BaseModel):
    """One distortion with its parameters and seed."""

    kind: DistortionKind = Field(description="Distortion type", frozen=True)
    params: StepParams = Field(description="Kind-specific parameters")
    seed: int = Field(default=0, ge=0, le=UINT64_MAX, description="Seed fixing any stochastic behavior")

    @model_validator(mode="after")
    def _params_match_kind(self) -> Self:
        if self.params.kind != self.kind:
            raise ValueError(f"params for {self.params.kind} given to a {self.kind} step")
        return self


class DegradationChain(BaseModel):
    """Ordered degradation steps for one utterance (at most one per kind, canonical order)."""

    utterance_id: str = Field(description="Utterance the chain was sampled for")
    steps: list[DegradationStep] = Field(description="Steps in application order")

    @model_validator(mode="after")
    def _check_steps(self) -> Self:
        if not 1 <= len(self.steps) <= MAX_STEPS:
            raise ValueError(f"a chain holds 1 to {MAX_STEPS} steps, got {len(self.steps)}")
        kinds = [step.kind for step in self.steps]
        if len(set(kinds)) != len(kinds):
            raise ValueError(f"duplicate distortion kinds in chain: {kinds}")
        positions = [CANONICAL_ORDER.index(kind) for kind in kinds]
        if positions != sorted(positions):
            raise ValueError(f"steps are not in canonical order: {kinds}")
        return self

    @property
    def kinds(self) -> list[DistortionKind]:
        """Kinds of the steps in order."""
        return [step.kind for step in self.steps]

    @classmethod
    def from_steps(cls, utterance_id: str, steps: list[DegradationStep]) -> "DegradationChain":
        """Build a chain after sorting steps into canonical order."""
        ordered = sorted(steps, key=lambda step: CANONICAL_ORDER.index(step.kind))
        return cls(utterance_id=utterance_id, steps=ordered)
