"""Base class for distortion implementations.

IDistortion is the abstract base for the seven distortion kinds. Each subclass turns one
DegradationStep into a DistortionOutput; the shared `apply` wrapper checks the step kind and
that rate and length of the signal are preserved.
"""

from abc import ABC, abstractmethod
from pathlib import Path
from typing import ClassVar

from pydantic import BaseModel, Field, PositiveInt, field_validator

from urgentkit.core.audio import AudioSignal, WavEncoding
from urgentkit.degrade.step import DegradationStep, DistortionKind


class CodecTemplate(BaseModel):
    """External encoder/decoder pair.

    `encode` and `decode` are command lines with {in}, {out} and {bitrate} placeholders,
    e.g. ``lame --quiet -b {bitrate} {in} {out}`` and ``lame --quiet --decode {in} {out}``.
    """

    encode: str = Field(description="Encoder command template")
    decode: str = Field(description="Decoder command template")
    extension: str = Field(default="bin", description="Extension of the intermediate encoded file")
    bitrates_kbps: list[PositiveInt] = Field(default_factory=lambda: [64], description="Bitrate choices")
    input_encoding: WavEncoding = Field(
        default=WavEncoding.PCM16,
        description="WAV encoding fed to the encoder; PCM16 quantizes the input, FLOAT32 keeps a copying codec bit-exact",
    )

    @field_validator("encode", "decode")
    @classmethod
    def _has_placeholders(cls, value: str) -> str:
        for placeholder in ("{in}", "{out}"):
            if placeholder not in value:
                raise ValueError(f"command template {value!r} lacks the {placeholder} placeholder")
        return value

    @field_validator("bitrates_kbps")
    @classmethod
    def _non_empty(cls, value: list[int]) -> list[int]:
        if not value:
            raise ValueError("bitrates_kbps must list at least one bitrate")
        return value


class DistortionResources(BaseModel):
    """External material a chain may need: a noise recording, an RIR and codec commands."""

    noise: AudioSignal | None = Field(default=None, description="Noise recording for additive_noise")
    rir: AudioSignal | None = Field(default=None, description="Room impulse response for reverberation")
    codec_templates: dict[str, CodecTemplate] = Field(default_factory=dict, description="Codec commands by id")
    workdir: Path | None = Field(default=None, description="Scratch directory for codec files")


class DistortionOutput(BaseModel):
    """Result of one step; `reference` is set only when the step redefines the metric target."""

    signal: AudioSignal = Field(description="Distorted signal")
    reference: AudioSignal | None = Field(default=None, description="Replacement reference signal")
    gain: float | None = Field(default=None, description="Realized gain applied by the step")
    realized_snr_db: float | None = Field(default=None, description="Measured SNR of a noise step")
    commands: list[str] = Field(default_factory=list, description="External commands run by the step")
    notes: dict[str, float] = Field(default_factory=dict, description="Other measured quantities")


class IDistortion(ABC):
    """Abstract base for distortions applied as a single chain step."""

    kind: ClassVar[DistortionKind]

    @classmethod
    @abstractmethod
    def _apply_original(
        cls, signal: AudioSignal, step: DegradationStep, resources: DistortionResources
    ) -> DistortionOutput:
        """Return the distorted signal for the given step parameters."""
        pass

    @classmethod
    def apply(cls, signal: AudioSignal, step: DegradationStep, resources: DistortionResources) -> DistortionOutput:
        """Apply the step; rate and length of the signal are preserved."""
        if step.kind != cls.kind:
            raise ValueError(f"{cls.__name__} cannot apply a {step.kind} step")

        output = cls._apply_original(signal, step, resources)
        if output.signal.rate_hz != signal.rate_hz or len(output.signal) != len(signal):
            raise RuntimeError(
                f"{step.kind} changed the signal from {len(signal)} samples at {signal.rate_hz} Hz"
                f" to {len(output.signal)} samples at {output.signal.rate_hz} Hz"
            )
        return output
