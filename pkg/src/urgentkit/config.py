"""Run configuration: one TOML document with a section per command.

    seed = 0
    workers = 4

    [prep]
    manifest_in = "raw.jsonl"
    manifest_out = "prep/manifest.jsonl"
    out_dir = "prep/audio"
    [prep.rules]
    score_min = 2.5
    [prep.tracks.track1]
    MLS = 450.0

    [simulate]
    manifest = "prep/manifest.jsonl"
    noise_manifest = "noise.jsonl"
    rir_manifest = "rir.jsonl"
    out_dir = "sim"
    [simulate.sampler.inclusion]
    reverberation = 0.5

    [evaluate]
    manifest = "sim/manifest.jsonl"
    output = "scores.csv"
    [evaluate.systems]
    noisy = "sim/degraded"

    [rank]
    scores = "scores.csv"
    out_dir = "rank"

Relative paths are resolved against the directory of the config file.
"""

import tomllib
from pathlib import Path
from typing import Any

from pydantic import BaseModel, Field, NonNegativeInt, PositiveInt, ValidationError, field_validator

from urgentkit.core.audio import WavEncoding
from urgentkit.core.errors import ConfigurationError
from urgentkit.core.seeding import UINT64_MAX
from urgentkit.corpus.filtering import FilterRules
from urgentkit.degrade.sampler import ChainSamplerConfig
from urgentkit.metrics.descriptor import METRIC_REGISTRY, SIGNAL_METRICS


class PrepConfig(BaseModel):
    manifest_in: Path = Field(description="Manifest of the raw corpus")
    manifest_out: Path = Field(description="Manifest of the prepared corpus")
    out_dir: Path = Field(description="Directory for prepared audio")
    rules: FilterRules = Field(default_factory=FilterRules, description="VAD and score filtering rules")
    external_scores: Path | None = Field(default=None, description="CSV of utterance_id,metric,value scores")
    budgets: dict[str, float] = Field(default_factory=dict, description="Hours per corpus; absent corpora are uncapped")
    tracks: dict[str, dict[str, float]] = Field(default_factory=dict, description="Named budget presets")
    encoding: WavEncoding = Field(default=WavEncoding.FLOAT32, description="Encoding of prepared audio")

    def budgets_for(self, track: str | None) -> dict[str, float]:
        """Budgets of `track`, or the plain `budgets` table without one."""
        if track is None:
            return self.budgets
        if track not in self.tracks:
            known = ", ".join(sorted(self.tracks)) or "none"
            raise ConfigurationError(f"unknown track {track!r}; configured tracks: {known}")
        return self.tracks[track]


class SimulateConfig(BaseModel):
    manifest: Path = Field(description="Manifest of clean utterances")
    out_dir: Path = Field(description="Root of the simulation output tree")
    noise_manifest: Path | None = Field(default=None, description="Manifest of noise recordings")
    rir_manifest: Path | None = Field(default=None, description="Manifest of room impulse responses")
    sampler: ChainSamplerConfig = Field(default_factory=ChainSamplerConfig, description="Chain sampling")
    encoding: WavEncoding = Field(default=WavEncoding.FLOAT32, description="Encoding of written audio")

    @field_validator("sampler", mode="before")
    @classmethod
    def _seed_from_top_level(cls, value: Any) -> Any:
        if isinstance(value, dict) and "master_seed" in value:
            raise ValueError("master_seed is taken from the top-level `seed`; remove it from [simulate.sampler]")
        return value


class TranscriptConfig(BaseModel):
    references: Path = Field(description="CSV utterance_id,<text_column> of reference transcripts")
    text_column: str = Field(default="text", description="Name of the reference text column")
    hypotheses: dict[str, Path] = Field(default_factory=dict, description="Per-system CSV utterance_id,hypothesis")


class EvaluateConfig(BaseModel):
    manifest: Path = Field(description="Manifest of reference signals")
    output: Path = Field(description="Score table CSV to write")
    systems: dict[str, Path] = Field(default_factory=dict, description="Enhanced audio directory per system")
    metrics: list[str] = Field(default_factory=lambda: list(SIGNAL_METRICS), description="Signal metrics to compute")
    ingest: dict[str, list[Path]] = Field(default_factory=dict, description="Score CSVs per ingested metric")
    transcripts: TranscriptConfig | None = Field(default=None, description="ASR transcripts for CAcc")

    @field_validator("metrics")
    @classmethod
    def _signal_metrics(cls, value: list[str]) -> list[str]:
        unknown = [name for name in value if name not in SIGNAL_METRICS]
        if unknown:
            raise ValueError(f"not computable from audio: {', '.join(unknown)}")
        return value

    @field_validator("ingest", mode="before")
    @classmethod
    def _listify(cls, value: Any) -> Any:
        if isinstance(value, dict):
            return {key: item if isinstance(item, list) else [item] for key, item in value.items()}
        return value

    @field_validator("ingest")
    @classmethod
    def _known_metrics(cls, value: dict[str, list[Path]]) -> dict[str, list[Path]]:
        unknown = [name for name in value if name not in METRIC_REGISTRY]
        if unknown:
            raise ValueError(f"unknown metric(s): {', '.join(unknown)}")
        return value


class RankConfig(BaseModel):
    scores: Path = Field(description="Score table CSV")
    out_dir: Path = Field(description="Directory for leaderboard files")
    category_config: Path | None = Field(default=None, description="Category TOML; default is the five categories")
    manifest: Path | None = Field(default=None, description="Manifest giving utterance languages")
    plot: bool = Field(default=True, description="Also save leaderboard figures")


class RunConfig(BaseModel):
    """A whole run; each command only needs its own section."""

    seed: NonNegativeInt = Field(default=0, le=UINT64_MAX, description="Master seed of the run")
    workers: PositiveInt = Field(default=1, description="Worker processes")
    prep: PrepConfig | None = None
    simulate: SimulateConfig | None = None
    evaluate: EvaluateConfig | None = None
    rank: RankConfig | None = None


def _format_errors(error: ValidationError) -> str:
    lines = []
    for detail in error.errors():
        location = ".".join(str(part) for part in detail["loc"]) or "<root>"
        lines.append(f"  {location}: {detail['msg']}")
    return "\n".join(lines)


def _resolve_paths(value: Any, base: Path) -> Any:
    match value:
        case Path() if not value.is_absolute():
            return base / value
        case BaseModel():
            updates = {name: _resolve_paths(getattr(value, name), base) for name in type(value).model_fields}
            return value.model_copy(update=updates)
        case dict():
            return {key: _resolve_paths(item, base) for key, item in value.items()}
        case list():
            return [_resolve_paths(item, base) for item in value]
        case _:
            return value


def run_config_from_dict(data: dict[str, Any], base_dir: str | Path = ".") -> RunConfig:
    """Validate a parsed config; every validation problem is reported in one ConfigurationError."""
    try:
        config = RunConfig.model_validate(data)
    except ValidationError as e:
        raise ConfigurationError(f"invalid config ({e.error_count()} problem(s)):\n{_format_errors(e)}") from e
    resolved: RunConfig = _resolve_paths(config, Path(base_dir).resolve())
    return resolved


def load_run_config(path: str | Path) -> RunConfig:
    """Read a TOML run config; relative paths in it resolve to absolute paths under its directory."""
    path = Path(path)
    try:
        with path.open("rb") as stream:
            data = tomllib.load(stream)
    except OSError as e:
        raise ConfigurationError(f"cannot read config {path}: {e}") from e
    except tomllib.TOMLDecodeError as e:
        raise ConfigurationError(f"{path}: {e}") from e
    try:
        return run_config_from_dict(data, path.resolve().parent)
    except ConfigurationError as e:
        raise ConfigurationError(f"{path}: {e}") from e


def missing_inputs(config: RunConfig, command: str) -> list[str]:
    """Input paths of `command` that do not exist (outputs are created on demand)."""
    paths: list[Path] = []
    match command:
        case "prep" if config.prep is not None:
            paths.append(config.prep.manifest_in)
            if config.prep.external_scores is not None:
                paths.append(config.prep.external_scores)
        case "simulate" if config.simulate is not None:
            paths.append(config.simulate.manifest)
            paths.extend(p for p in (config.simulate.noise_manifest, config.simulate.rir_manifest) if p is not None)
        case "evaluate" if config.evaluate is not None:
            paths.append(config.evaluate.manifest)
            paths.extend(config.evaluate.systems.values())
            paths.extend(p for files in config.evaluate.ingest.values() for p in files)
            if config.evaluate.transcripts is not None:
                paths.append(config.evaluate.transcripts.references)
                paths.extend(config.evaluate.transcripts.hypotheses.values())
        case "rank" if config.rank is not None:
            paths.append(config.rank.scores)
            paths.extend(p for p in (config.rank.category_config, config.rank.manifest) if p is not None)
        case "prep" | "simulate" | "evaluate" | "rank":
            return [f"config has no [{command}] section"]
        case _:
            raise NotImplementedError(f"Command {command} is not supported")
    return [f"missing path: {path}" for path in paths if not path.exists()]
