"""Random degradation chains.

Each utterance gets a seed derived from (master_seed, utterance_id) alone, so the chain drawn
for an utterance does not depend on worker count or processing order.
"""

from typing import Self

import numpy as np
from pydantic import BaseModel, Field, PositiveFloat, PositiveInt, field_validator, model_validator

from urgentkit.core.audio import CHALLENGE_RATES
from urgentkit.core.seeding import UINT64_MAX, stable_seed
from urgentkit.degrade.step import (
    CANONICAL_ORDER,
    MAX_STEPS,
    AdditiveNoiseParams,
    BandwidthLimitationParams,
    ClippingParams,
    CodecParams,
    DegradationChain,
    DegradationStep,
    DistortionKind,
    PacketLossParams,
    ReferenceMode,
    ReverberationParams,
    StepParams,
    WindNoiseParams,
)
from urgentkit.distortions.base import CodecTemplate

# Kinds removed first when more than MAX_STEPS are drawn
DROP_PRIORITY: tuple[DistortionKind, ...] = (
    DistortionKind.CODEC,
    DistortionKind.PACKET_LOSS,
    DistortionKind.CLIPPING,
    DistortionKind.BANDWIDTH_LIMITATION,
    DistortionKind.REVERBERATION,
)

Range = tuple[float, float]


class InclusionProbabilities(BaseModel):
    """Probability of each optional kind; wind_noise is the chance wind replaces recorded noise."""

    wind_noise: float = Field(default=0.0, ge=0.0, le=1.0)
    reverberation: float = Field(default=0.0, ge=0.0, le=1.0)
    clipping: float = Field(default=0.0, ge=0.0, le=1.0)
    bandwidth_limitation: float = Field(default=0.0, ge=0.0, le=1.0)
    codec: float = Field(default=0.0, ge=0.0, le=1.0)
    packet_loss: float = Field(default=0.0, ge=0.0, le=1.0)


class PacketLossRanges(BaseModel):
    p_loss: Range = Field(default=(0.05, 0.05), description="Range of the good-to-bad probability")
    q_recover: Range = Field(default=(0.5, 0.5), description="Range of the bad-to-good probability")
    packet_ms: PositiveFloat = Field(default=20.0, description="Packet duration in milliseconds")

    @model_validator(mode="after")
    def _check_ranges(self) -> Self:
        _check_range("p_loss", self.p_loss, 0.0, 1.0)
        _check_range("q_recover", self.q_recover, 0.0, 1.0)
        if self.q_recover[0] <= 0.0:
            raise ValueError("q_recover must be positive")
        return self


def _check_range(name: str, bounds: Range, lowest: float, highest: float) -> None:
    low, high = bounds
    if low > high:
        raise ValueError(f"{name} range has low {low} > high {high}")
    if low < lowest or high > highest:
        raise ValueError(f"{name} range {bounds} must lie within [{lowest}, {highest}]")


class ChainSamplerConfig(BaseModel):
    """Distribution from which degradation chains are drawn."""

    master_seed: int = Field(default=0, ge=0, le=UINT64_MAX, description="Seed of the whole run")
    inclusion: InclusionProbabilities = Field(default_factory=InclusionProbabilities)
    snr_range_db: Range = Field(default=(-5.0, 20.0), description="SNR range for additive noise")
    wind_snr_range_db: Range = Field(default=(-5.0, 15.0), description="SNR range for wind noise")
    gustiness_range: Range = Field(default=(0.0, 1.0), description="Wind gustiness range")
    clipping_ratio_range: Range = Field(default=(0.1, 0.9), description="Clipping ratio range")
    bandwidth_rates: list[PositiveInt] = Field(
        default_factory=lambda: list(CHALLENGE_RATES[:-1]), description="Target rates for bandwidth limitation"
    )
    codecs: dict[str, CodecTemplate] = Field(default_factory=dict, description="Codec command templates by id")
    packet_loss: PacketLossRanges = Field(default_factory=PacketLossRanges)
    reference_mode: ReferenceMode = Field(default=ReferenceMode.DRY, description="Metric reference under reverb")

    @field_validator("snr_range_db", "wind_snr_range_db")
    @classmethod
    def _ordered(cls, value: Range) -> Range:
        if value[0] > value[1]:
            raise ValueError(f"SNR range has low {value[0]} > high {value[1]}")
        return value

    @field_validator("bandwidth_rates")
    @classmethod
    def _challenge_rates(cls, value: list[int]) -> list[int]:
        unknown = [rate for rate in value if rate not in CHALLENGE_RATES]
        if unknown:
            raise ValueError(f"bandwidth_rates must be challenge sampling rates, got {unknown}")
        return sorted(set(value))

    @model_validator(mode="after")
    def _check(self) -> Self:
        _check_range("gustiness", self.gustiness_range, 0.0, 1.0)
        _check_range("clipping ratio", self.clipping_ratio_range, 0.0, 1.0)
        if self.clipping_ratio_range[0] <= 0.0:
            raise ValueError("clipping ratios must be positive")
        if self.inclusion.codec > 0.0 and not self.codecs:
            raise ValueError("codec inclusion probability is positive but no codec templates are configured")
        if self.inclusion.bandwidth_limitation > 0.0 and not self.bandwidth_rates:
            raise ValueError("bandwidth limitation is enabled but bandwidth_rates is empty")
        return self


def utterance_seed(master_seed: int, utterance_id: str) -> int:
    """Seed of the chain drawn for an utterance."""
    return stable_seed(master_seed, utterance_id)


def step_seed(chain_seed: int, kind: DistortionKind) -> int:
    """Seed of one step, derived from the chain seed and the step kind."""
    sequence = np.random.SeedSequence([chain_seed, CANONICAL_ORDER.index(kind)])
    return int(sequence.generate_state(1, dtype=np.uint64)[0])


def _uniform(rng: np.random.Generator, bounds: Range) -> float:
    return float(rng.uniform(bounds[0], bounds[1]))


def _draw_params(
    kind: DistortionKind, config: ChainSamplerConfig, rng: np.random.Generator, rates: list[int]
) -> StepParams:
    match kind:
        case DistortionKind.ADDITIVE_NOISE:
            return AdditiveNoiseParams(snr_db=_uniform(rng, config.snr_range_db))
        case DistortionKind.WIND_NOISE:
            return WindNoiseParams(
                snr_db=_uniform(rng, config.wind_snr_range_db), gustiness=_uniform(rng, config.gustiness_range)
            )
        case DistortionKind.REVERBERATION:
            return ReverberationParams(reference_mode=config.reference_mode)
        case DistortionKind.CLIPPING:
            return ClippingParams(ratio=_uniform(rng, config.clipping_ratio_range))
        case DistortionKind.BANDWIDTH_LIMITATION:
            return BandwidthLimitationParams(target_hz=int(rates[rng.integers(len(rates))]))
        case DistortionKind.CODEC:
            codec_id = sorted(config.codecs)[rng.integers(len(config.codecs))]
            bitrates = config.codecs[codec_id].bitrates_kbps
            return CodecParams(codec_id=codec_id, bitrate_kbps=int(bitrates[rng.integers(len(bitrates))]))
        case DistortionKind.PACKET_LOSS:
            ranges = config.packet_loss
            return PacketLossParams(
                p_loss=_uniform(rng, ranges.p_loss),
                q_recover=_uniform(rng, ranges.q_recover),
                packet_ms=ranges.packet_ms,
            )
        case _:
            raise NotImplementedError(f"Distortion kind {kind} is not supported")


def sample_chain(config: ChainSamplerConfig, utterance_id: str, rate_hz: int | None = None) -> DegradationChain:
    """Draw the degradation chain of one utterance.

    One of additive_noise or wind_noise is always present; every other kind is included with
    its configured probability, and kinds are dropped in DROP_PRIORITY order while more than
    five remain. When `rate_hz` is given, bandwidth limitation only targets lower rates (and is
    left out if there are none).
    """
    seed = utterance_seed(config.master_seed, utterance_id)
    rng = np.random.default_rng(seed)
    probabilities = config.inclusion

    # Inclusion draws happen for every kind so that later draws do not shift
    include_draws = rng.random(6)
    noise_kind = DistortionKind.WIND_NOISE if include_draws[0] < probabilities.wind_noise else DistortionKind.ADDITIVE_NOISE
    kinds = [noise_kind]
    optional = (
        (DistortionKind.REVERBERATION, probabilities.reverberation),
        (DistortionKind.CLIPPING, probabilities.clipping),
        (DistortionKind.BANDWIDTH_LIMITATION, probabilities.bandwidth_limitation),
        (DistortionKind.CODEC, probabilities.codec),
        (DistortionKind.PACKET_LOSS, probabilities.packet_loss),
    )
    for (kind, probability), draw in zip(optional, include_draws[1:], strict=True):
        if draw < probability:
            kinds.append(kind)

    rates = [rate for rate in config.bandwidth_rates if rate_hz is None or rate < rate_hz]
    if not rates and DistortionKind.BANDWIDTH_LIMITATION in kinds:
        kinds.remove(DistortionKind.BANDWIDTH_LIMITATION)
    for kind in DROP_PRIORITY:
        if len(kinds) <= MAX_STEPS:
            break
        if kind in kinds:
            kinds.remove(kind)

    steps = []
    for kind in sorted(kinds, key=CANONICAL_ORDER.index):
        params = _draw_params(kind, config, rng, rates)
        steps.append(DegradationStep(kind=kind, params=params, seed=step_seed(seed, kind)))
    return DegradationChain(utterance_id=utterance_id, steps=steps)
