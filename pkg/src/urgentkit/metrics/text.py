"""Character accuracy (1 - character error rate) of ASR transcripts."""

import csv
import logging
import re
import unicodedata
from collections.abc import Mapping, Sequence
from pathlib import Path

import Levenshtein

from urgentkit.core.errors import ScoreFormatError
from urgentkit.metrics.descriptor import get_descriptor
from urgentkit.metrics.table import ScoreEntry, ScoreTable

logger = logging.getLogger(__name__)

# Languages written without spaces between words; whitespace is dropped before scoring
NON_SPACE_LANGUAGES = frozenset({"ja", "zh", "zn", "th", "lo", "km", "my"})

_WHITESPACE = re.compile(r"\s+")


def edit_distance(reference: Sequence[str], hypothesis: Sequence[str]) -> int:
    """Levenshtein distance (insertions, deletions and substitutions) between two token sequences."""
    return int(Levenshtein.distance(reference, hypothesis))


def normalize_text(text: str, language: str = "unknown") -> str:
    """Casefold, drop Unicode punctuation and collapse whitespace (remove it for non-space languages)."""
    folded = unicodedata.normalize("NFKC", text).casefold()
    stripped = "".join(char for char in folded if not unicodedata.category(char).startswith("P"))
    collapsed = _WHITESPACE.sub(" ", stripped).strip()
    if language.lower() in NON_SPACE_LANGUAGES:
        return collapsed.replace(" ", "")
    return collapsed


def char_accuracy(reference: str, hypothesis: str, language: str = "unknown") -> float:
    """1 - edit_distance / len(reference) over normalized characters; negative when insertions dominate."""
    ref = normalize_text(reference, language)
    if not ref:
        raise ValueError("char_accuracy: reference is empty after normalization")
    hyp = normalize_text(hypothesis, language)
    return 1.0 - edit_distance(ref, hyp) / len(ref)


def read_transcripts(path: str | Path, text_column: str) -> dict[str, str]:
    """Read a two-column CSV `utterance_id,<text_column>` into {utterance_id: text}."""
    path = Path(path)
    transcripts: dict[str, str] = {}
    with path.open(newline="", encoding="utf-8") as stream:
        reader = csv.reader(stream)
        header = next(reader, None)
        if header != ["utterance_id", text_column]:
            raise ScoreFormatError(str(path), 1, f"expected header utterance_id,{text_column}, got {header}")
        for line_number, row in enumerate(reader, start=2):
            if len(row) != 2:
                raise ScoreFormatError(str(path), line_number, f"expected 2 fields, got {len(row)}")
            if row[0] in transcripts:
                raise ScoreFormatError(str(path), line_number, f"duplicate utterance {row[0]!r}")
            transcripts[row[0]] = row[1]
    return transcripts


def score_transcripts(
    table: ScoreTable,
    system_id: str,
    hypotheses: Mapping[str, str],
    references: Mapping[str, str],
    languages: Mapping[str, str],
) -> ScoreTable:
    """Add a CAcc entry for every utterance of `system_id` that has both a hypothesis and a reference."""
    descriptor = get_descriptor("CAcc")
    missing = sorted(set(references) - set(hypotheses))
    if missing:
        logger.warning("%s: no hypothesis for %d utterance(s), e.g. %s", system_id, len(missing), missing[0])
    for utterance_id in sorted(set(hypotheses) & set(references)):
        value = char_accuracy(references[utterance_id], hypotheses[utterance_id], languages.get(utterance_id, "unknown"))
        table.add(ScoreEntry(system_id=system_id, utterance_id=utterance_id, metric="CAcc", value=value), descriptor)
    return table
