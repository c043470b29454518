import json
from pathlib import Path

import pytest

from urgentkit.core.errors import DuplicateScoreError, ScoreFormatError
from urgentkit.corpus.manifest import (
    Manifest,
    UtteranceRecord,
    attach_external_scores,
    read_external_scores,
    read_manifest,
    write_manifest,
)


class TestManifest:
    """Tests for manifest reading and writing."""

    def test_write_then_read(self, tmp_path: Path) -> None:
        """Test that records survive a write and read, absolute paths included."""
        records = [
            UtteranceRecord(utterance_id="a", path=tmp_path / "a.wav", language="en", duration_s=1.5),
            UtteranceRecord(utterance_id="b", path=tmp_path / "b.wav", corpus="vctk", external_scores={"DNSMOS": 3.1}),
        ]
        write_manifest(records, tmp_path / "m.jsonl")
        assert read_manifest(tmp_path / "m.jsonl") == records

    def test_relative_paths(self, tmp_path: Path) -> None:
        """Test that relative audio paths resolve against the manifest directory."""
        (tmp_path / "sub").mkdir()
        manifest = tmp_path / "sub" / "m.jsonl"
        manifest.write_text('{"utterance_id": "a", "path": "audio/a.wav"}\n\n', encoding="utf-8")
        (record,) = read_manifest(manifest)
        assert record.path == tmp_path / "sub" / "audio" / "a.wav"
        assert record.language == "unknown"

    def test_paths_below_manifest_are_stored_relative(self, tmp_path: Path) -> None:
        """Test that audio under the manifest directory is written relative to it and read back absolute."""
        record = UtteranceRecord(utterance_id="a", path=tmp_path / "audio" / "a.wav")
        outside = UtteranceRecord(utterance_id="b", path=Path("/elsewhere/b.wav"))
        write_manifest([record, outside], tmp_path / "m.jsonl")
        stored = [json.loads(line)["path"] for line in (tmp_path / "m.jsonl").read_text(encoding="utf-8").splitlines()]
        assert stored == ["audio/a.wav", "/elsewhere/b.wav"]
        assert read_manifest(tmp_path / "m.jsonl") == [record, outside]

    def test_round_trip_from_another_directory(self, tmp_path: Path, monkeypatch: pytest.MonkeyPatch) -> None:
        """Test that a manifest written with a relative path reads back the same files."""
        (tmp_path / "prep" / "audio").mkdir(parents=True)
        monkeypatch.chdir(tmp_path)
        record = UtteranceRecord(utterance_id="u1", path=(tmp_path / "prep" / "audio" / "u1.wav"))
        write_manifest([record], Path("prep") / "manifest.jsonl")
        (read,) = read_manifest(Path("prep") / "manifest.jsonl")
        assert read.path.resolve() == tmp_path / "prep" / "audio" / "u1.wav"

    def test_duplicate_ids(self, tmp_path: Path) -> None:
        """Test that duplicate utterance ids are rejected."""
        manifest = tmp_path / "m.jsonl"
        manifest.write_text(
            '{"utterance_id": "a", "path": "a.wav"}\n{"utterance_id": "a", "path": "b.wav"}\n', encoding="utf-8"
        )
        with pytest.raises(ValueError, match="duplicate utterance ids: a"):
            read_manifest(manifest)

    def test_invalid_line(self, tmp_path: Path) -> None:
        """Test that a malformed line is reported with its line number."""
        manifest = tmp_path / "m.jsonl"
        manifest.write_text('{"utterance_id": "a", "path": "a.wav"}\n{"utterance_id": ""}\n', encoding="utf-8")
        with pytest.raises(ValueError, match=r"m\.jsonl:2: invalid manifest record"):
            read_manifest(manifest)

    def test_write_rejects_duplicates(self, tmp_path: Path) -> None:
        """Test that duplicates are refused before anything is written."""
        record = UtteranceRecord(utterance_id="a", path=Path("a.wav"))
        with pytest.raises(ValueError, match="duplicate"):
            write_manifest([record, record], tmp_path / "m.jsonl")
        assert not (tmp_path / "m.jsonl").exists()

    def test_empty_manifest(self) -> None:
        """Test that an empty manifest is valid."""
        assert Manifest().records == []


class TestExternalScores:
    """Tests for external score files."""

    def test_read_and_attach(self, tmp_path: Path) -> None:
        """Test that scores are read and merged into matching records."""
        path = tmp_path / "scores.csv"
        path.write_text("utterance_id,metric,value\na,DNSMOS,3.5\na,NISQA,4.0\nzz,DNSMOS,1.0\n", encoding="utf-8")
        scores = read_external_scores(path)
        assert scores == {"a": {"DNSMOS": 3.5, "NISQA": 4.0}, "zz": {"DNSMOS": 1.0}}
        records = [
            UtteranceRecord(utterance_id="a", path=Path("a.wav"), external_scores={"UTMOS": 2.0}),
            UtteranceRecord(utterance_id="b", path=Path("b.wav")),
        ]
        merged = attach_external_scores(records, scores)
        assert merged[0].external_scores == {"UTMOS": 2.0, "DNSMOS": 3.5, "NISQA": 4.0}
        assert merged[1].external_scores == {}

    @pytest.mark.parametrize(
        ("content", "message"),
        [
            ("id,metric,value\n", "expected header"),
            ("utterance_id,metric,value\na,DNSMOS\n", "expected 3 fields"),
            ("utterance_id,metric,value\na,DNSMOS,high\n", "non-numeric"),
        ],
    )
    def test_malformed(self, tmp_path: Path, content: str, message: str) -> None:
        """Test that malformed rows raise ScoreFormatError."""
        path = tmp_path / "scores.csv"
        path.write_text(content, encoding="utf-8")
        with pytest.raises(ScoreFormatError, match=message):
            read_external_scores(path)

    def test_duplicate_score(self, tmp_path: Path) -> None:
        """Test that a repeated (utterance, metric) pair is rejected."""
        path = tmp_path / "scores.csv"
        path.write_text("utterance_id,metric,value\na,DNSMOS,3.5\na,DNSMOS,3.6\n", encoding="utf-8")
        with pytest.raises(DuplicateScoreError, match=":3: duplicate score"):
            read_external_scores(path)
