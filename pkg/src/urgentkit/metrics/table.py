"""ScoreTable: per (system, utterance, metric) values, with CSV ingestion and bit-stable CSV output."""

import csv
import math
from pathlib import Path
from typing import Self

from pydantic import BaseModel, ConfigDict, Field, model_validator

from urgentkit.core.errors import DuplicateScoreError, ScoreFormatError
from urgentkit.metrics.descriptor import MetricDescriptor, MetricSource

INGEST_HEADER = ["system_id", "utterance_id", "value"]
TABLE_HEADER = ["system_id", "utterance_id", "metric", "value"]

ScoreKey = tuple[str, str, str]


class ScoreEntry(BaseModel):
    model_config = ConfigDict(frozen=True)

    system_id: str
    utterance_id: str
    metric: str
    value: float

    @property
    def key(self) -> ScoreKey:
        return (self.system_id, self.utterance_id, self.metric)


class ScoreTable(BaseModel):
    """Metric values keyed by (system_id, utterance_id, metric); one value per key, no NaN."""

    entries: dict[ScoreKey, float] = Field(default_factory=dict)
    descriptors: dict[str, MetricDescriptor] = Field(default_factory=dict)

    @model_validator(mode="after")
    def _check(self) -> Self:
        for (system_id, utterance_id, metric), value in self.entries.items():
            if metric not in self.descriptors:
                raise ValueError(f"no descriptor for metric {metric!r}")
            if math.isnan(value):
                raise ValueError(f"NaN value for ({system_id}, {utterance_id}, {metric})")
        return self

    def add(self, entry: ScoreEntry, descriptor: MetricDescriptor) -> None:
        """Insert one value; raises DuplicateScoreError if the key is already present."""
        if entry.metric != descriptor.name:
            raise ValueError(f"entry for {entry.metric!r} given with descriptor {descriptor.name!r}")
        if math.isnan(entry.value):
            raise ValueError(f"NaN value for {entry.key}")
        if entry.key in self.entries:
            system_id, utterance_id, metric = entry.key
            raise DuplicateScoreError(
                f"duplicate score for system {system_id!r}, utterance {utterance_id!r}, metric {metric!r}"
            )
        self.descriptors.setdefault(descriptor.name, descriptor)
        self.entries[entry.key] = entry.value

    def merge(self, other: "ScoreTable") -> "ScoreTable":
        """Union of two tables with disjoint keys."""
        merged = ScoreTable(entries=dict(self.entries), descriptors=dict(self.descriptors))
        for (system_id, utterance_id, metric), value in other.entries.items():
            entry = ScoreEntry(system_id=system_id, utterance_id=utterance_id, metric=metric, value=value)
            merged.add(entry, other.descriptors[metric])
        return merged

    @property
    def systems(self) -> list[str]:
        return sorted({system_id for system_id, _, _ in self.entries})

    @property
    def metrics(self) -> list[str]:
        return sorted({metric for _, _, metric in self.entries})

    def values(self, system_id: str, metric: str) -> dict[str, float]:
        """Per-utterance values of one system for one metric."""
        return {u: v for (s, u, m), v in self.entries.items() if s == system_id and m == metric}

    def sorted_entries(self) -> list[ScoreEntry]:
        return [
            ScoreEntry(system_id=s, utterance_id=u, metric=m, value=v) for (s, u, m), v in sorted(self.entries.items())
        ]


def ingest_scores(path: str | Path, descriptor: MetricDescriptor, table: ScoreTable) -> ScoreTable:
    """Merge a `system_id,utterance_id,value` CSV for one ingested metric into a copy of `table`."""
    if descriptor.source != MetricSource.INGESTED:
        raise ValueError(f"{descriptor.name} is computed, not ingested")
    path = Path(path)
    result = ScoreTable(entries=dict(table.entries), descriptors=dict(table.descriptors))
    with path.open(newline="", encoding="utf-8") as stream:
        reader = csv.reader(stream)
        header = next(reader, None)
        if header != INGEST_HEADER:
            raise ScoreFormatError(str(path), 1, f"expected header {','.join(INGEST_HEADER)}, got {header}")
        for line_number, row in enumerate(reader, start=2):
            if len(row) != len(INGEST_HEADER):
                raise ScoreFormatError(str(path), line_number, f"expected 3 fields, got {len(row)}")
            system_id, utterance_id, raw = row
            try:
                value = float(raw)
            except ValueError as e:
                raise ScoreFormatError(str(path), line_number, f"non-numeric value {raw!r}") from e
            if math.isnan(value):
                raise ScoreFormatError(str(path), line_number, "NaN value")
            entry = ScoreEntry(system_id=system_id, utterance_id=utterance_id, metric=descriptor.name, value=value)
            try:
                result.add(entry, descriptor)
            except DuplicateScoreError as e:
                raise DuplicateScoreError(f"{path}:{line_number}: {e}") from e
    return result


def write_score_table(table: ScoreTable, path: str | Path) -> None:
    """Write `system_id,utterance_id,metric,value` rows sorted by key; values use repr for exact round trips."""
    with Path(path).open("w", newline="", encoding="utf-8") as stream:
        writer = csv.writer(stream, lineterminator="\n")
        writer.writerow(TABLE_HEADER)
        for entry in table.sorted_entries():
            writer.writerow([entry.system_id, entry.utterance_id, entry.metric, repr(entry.value)])


def read_score_table(path: str | Path, descriptors: dict[str, MetricDescriptor]) -> ScoreTable:
    """Read a table written by write_score_table."""
    path = Path(path)
    table = ScoreTable()
    with path.open(newline="", encoding="utf-8") as stream:
        reader = csv.reader(stream)
        header = next(reader, None)
        if header != TABLE_HEADER:
            raise ScoreFormatError(str(path), 1, f"expected header {','.join(TABLE_HEADER)}, got {header}")
        for line_number, row in enumerate(reader, start=2):
            if len(row) != len(TABLE_HEADER):
                raise ScoreFormatError(str(path), line_number, f"expected 4 fields, got {len(row)}")
            system_id, utterance_id, metric, raw = row
            if metric not in descriptors:
                raise ScoreFormatError(str(path), line_number, f"unknown metric {metric!r}")
            try:
                value = float(raw)
            except ValueError as e:
                raise ScoreFormatError(str(path), line_number, f"non-numeric value {raw!r}") from e
            if math.isnan(value):
                raise ScoreFormatError(str(path), line_number, "NaN value")
            entry = ScoreEntry(system_id=system_id, utterance_id=utterance_id, metric=metric, value=value)
            table.add(entry, descriptors[metric])
    return table
