"""Utterance manifests (one JSON record per line) and external score files."""

import csv
import json
import logging
from collections import Counter
from pathlib import Path
from typing import Self

from pydantic import BaseModel, Field, PositiveFloat, PositiveInt, ValidationError, model_validator

from urgentkit.core.errors import DuplicateScoreError, ScoreFormatError

logger = logging.getLogger(__name__)


class UtteranceRecord(BaseModel):
    """One utterance and its provenance through the pipeline."""

    utterance_id: str = Field(min_length=1, description="Identifier, unique within a manifest")
    path: Path = Field(description="Audio file; relative paths are relative to the manifest")
    language: str = Field(default="unknown", description="ISO-639-1 code or 'unknown'")
    corpus: str = Field(default="unknown", description="Source corpus name")
    duration_s: PositiveFloat | None = Field(default=None, description="Duration in seconds, when known")
    assigned_rate_hz: PositiveInt | None = Field(default=None, description="Rate chosen by preprocessing")
    external_scores: dict[str, float] = Field(default_factory=dict, description="Ingested scores by metric")


class Manifest(BaseModel):
    """Records with unique utterance ids, in file order."""

    records: list[UtteranceRecord] = Field(default_factory=list)

    @model_validator(mode="after")
    def _unique_ids(self) -> Self:
        counts = Counter(record.utterance_id for record in self.records)
        duplicates = sorted(utterance_id for utterance_id, count in counts.items() if count > 1)
        if duplicates:
            raise ValueError(f"duplicate utterance ids: {', '.join(duplicates)}")
        return self


def read_manifest(path: str | Path) -> list[UtteranceRecord]:
    """Read a manifest; relative audio paths are resolved against the manifest's directory."""
    path = Path(path)
    records: list[UtteranceRecord] = []
    with path.open(encoding="utf-8") as stream:
        for line_number, line in enumerate(stream, start=1):
            if not line.strip():
                continue
            try:
                record = UtteranceRecord.model_validate(json.loads(line))
            except (json.JSONDecodeError, ValidationError) as e:
                raise ValueError(f"{path}:{line_number}: invalid manifest record: {e}") from e
            if not record.path.is_absolute():
                record = record.model_copy(update={"path": path.parent / record.path})
            records.append(record)
    return Manifest(records=records).records


def _relative_to_manifest(audio: Path, base: Path) -> Path:
    if not audio.is_absolute():
        return audio
    resolved = audio.resolve()
    return resolved.relative_to(base) if resolved.is_relative_to(base) else audio


def dump_manifest(records: list[UtteranceRecord], path: str | Path) -> str:
    """Manifest text for a file at `path`: records in order, one compact JSON object per line.

    Absolute audio paths below the manifest directory are stored relative to it, so the file reads
    back to the same paths from any working directory. Relative paths are taken as manifest-relative.
    """
    Manifest(records=records)
    base = Path(path).resolve().parent
    lines = [
        record.model_copy(update={"path": _relative_to_manifest(record.path, base)}).model_dump_json() + "\n"
        for record in records
    ]
    return "".join(lines)


def write_manifest(records: list[UtteranceRecord], path: str | Path) -> None:
    Path(path).write_text(dump_manifest(records, path), encoding="utf-8")


def read_external_scores(path: str | Path) -> dict[str, dict[str, float]]:
    """Read `utterance_id,metric,value` rows into {utterance_id: {metric: value}}."""
    path = Path(path)
    scores: dict[str, dict[str, float]] = {}
    with path.open(newline="", encoding="utf-8") as stream:
        reader = csv.reader(stream)
        header = next(reader, None)
        if header != ["utterance_id", "metric", "value"]:
            raise ScoreFormatError(str(path), 1, f"expected header utterance_id,metric,value, got {header}")
        for line_number, row in enumerate(reader, start=2):
            if len(row) != 3:
                raise ScoreFormatError(str(path), line_number, f"expected 3 fields, got {len(row)}")
            utterance_id, metric, value = row
            try:
                number = float(value)
            except ValueError as e:
                raise ScoreFormatError(str(path), line_number, f"non-numeric value {value!r}") from e
            entry = scores.setdefault(utterance_id, {})
            if metric in entry:
                raise DuplicateScoreError(f"{path}:{line_number}: duplicate score ({utterance_id}, {metric})")
            entry[metric] = number
    return scores


def attach_external_scores(
    records: list[UtteranceRecord], scores: dict[str, dict[str, float]]
) -> list[UtteranceRecord]:
    """Merge ingested scores into the records' external_scores."""
    unknown = set(scores) - {record.utterance_id for record in records}
    if unknown:
        logger.warning("Ignoring scores for %d utterance(s) not in the manifest", len(unknown))
    return [
        record.model_copy(
            update={"external_scores": {**record.external_scores, **scores.get(record.utterance_id, {})}}
        )
        for record in records
    ]
