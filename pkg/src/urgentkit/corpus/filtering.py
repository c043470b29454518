"""Corpus filtering (voice activity and ingested quality scores) and per-corpus duration caps."""

import logging
from collections import Counter, defaultdict
from collections.abc import Callable, Mapping

import numpy as np
from pydantic import BaseModel, Field, NonNegativeFloat, NonNegativeInt

from urgentkit.core.audio import read_wav
from urgentkit.core.errors import ConfigurationError
from urgentkit.core.seeding import stable_seed
from urgentkit.corpus.analysis import SpeechActivity, vad_speech_ratio
from urgentkit.corpus.manifest import UtteranceRecord

logger = logging.getLogger(__name__)

SECONDS_PER_HOUR = 3600.0


class FilterRules(BaseModel):
    """Keep rules; score filtering applies only when score_min is set."""

    min_speech_ratio: float = Field(default=0.5, ge=0.0, le=1.0, description="Minimum VAD active-frame ratio")
    min_active_s: NonNegativeFloat = Field(default=1.0, description="Minimum VAD active duration in seconds")
    score_metric: str = Field(default="DNSMOS", description="External score used for quality filtering")
    score_min: float | None = Field(default=None, description="Minimum score (e.g. 2.5); None disables")


class FilterCounts(BaseModel):
    kept: NonNegativeInt = 0
    dropped_by_vad: NonNegativeInt = 0
    dropped_by_score: NonNegativeInt = 0
    dropped_by_cap: NonNegativeInt = 0
    dropped_unreadable: NonNegativeInt = 0

    @property
    def total(self) -> int:
        return self.kept + self.dropped_by_vad + self.dropped_by_score + self.dropped_by_cap + self.dropped_unreadable


class FilterReport(FilterCounts):
    """Outcome counts, overall and broken down by corpus and by language."""

    per_corpus: dict[str, FilterCounts] = Field(default_factory=dict)
    per_language: dict[str, FilterCounts] = Field(default_factory=dict)

    def tally(self, record: UtteranceRecord, outcome: str) -> None:
        """Count one record under `outcome` (a FilterCounts field name)."""
        for counts in (
            self,
            self.per_corpus.setdefault(record.corpus, FilterCounts()),
            self.per_language.setdefault(record.language, FilterCounts()),
        ):
            setattr(counts, outcome, getattr(counts, outcome) + 1)

    def recount_kept(self, dropped: list[UtteranceRecord], outcome: str) -> None:
        """Move records previously counted as kept to `outcome`."""
        for record in dropped:
            self.tally(record, outcome)
            for counts in (self, self.per_corpus[record.corpus], self.per_language[record.language]):
                counts.kept -= 1


def _load_activity(record: UtteranceRecord) -> SpeechActivity:
    return vad_speech_ratio(read_wav(record.path))


def filter_corpus(
    records: list[UtteranceRecord],
    rules: FilterRules,
    activity: Mapping[str, SpeechActivity] | None = None,
    load_activity: Callable[[UtteranceRecord], SpeechActivity] = _load_activity,
) -> tuple[list[UtteranceRecord], FilterReport]:
    """Drop records failing the VAD rules, then records scoring below score_min; order is preserved.

    `activity` holds precomputed VAD results by utterance id; other records are read from disk.
    """
    if rules.score_min is not None:
        missing = [r.utterance_id for r in records if rules.score_metric not in r.external_scores]
        if missing:
            raise ConfigurationError(f"no {rules.score_metric} score for utterance(s): {', '.join(missing)}")

    report = FilterReport()
    kept: list[UtteranceRecord] = []
    for record in records:
        vad = activity[record.utterance_id] if activity and record.utterance_id in activity else load_activity(record)
        if vad.ratio < rules.min_speech_ratio or vad.active_s < rules.min_active_s:
            report.tally(record, "dropped_by_vad")
        elif rules.score_min is not None and record.external_scores[rules.score_metric] < rules.score_min:
            report.tally(record, "dropped_by_score")
        else:
            report.tally(record, "kept")
            kept.append(record)

    logger.info(
        "Kept %d of %d utterances (%d dropped by VAD, %d by score)",
        report.kept,
        len(records),
        report.dropped_by_vad,
        report.dropped_by_score,
    )
    return kept, report


def _stratified_order(records: list[UtteranceRecord], rng: np.random.Generator) -> list[UtteranceRecord]:
    """Shuffle within each language, then interleave so every prefix keeps the language mix."""
    by_language: dict[str, list[UtteranceRecord]] = defaultdict(list)
    for record in records:
        by_language[record.language].append(record)

    keyed: list[tuple[float, str, UtteranceRecord]] = []
    for language in sorted(by_language):
        group = by_language[language]
        order = rng.permutation(len(group))
        keyed.extend(((rank + 0.5) / len(group), language, group[i]) for rank, i in enumerate(order))
    keyed.sort(key=lambda item: (item[0], item[1]))
    return [record for _, _, record in keyed]


def cap_duration(records: list[UtteranceRecord], budgets: Mapping[str, float], seed: int) -> list[UtteranceRecord]:
    """Keep records of each budgeted corpus until its hour budget would be exceeded.

    Selection follows a language-stratified seeded shuffle; unbudgeted corpora pass through
    and the input order is preserved.
    """
    negative = {corpus: hours for corpus, hours in budgets.items() if hours < 0}
    if negative:
        raise ValueError(f"duration budgets must be non-negative: {negative}")
    unknown_duration = [r.utterance_id for r in records if r.corpus in budgets and r.duration_s is None]
    if unknown_duration:
        raise ValueError(f"duration_s is required for capping: {', '.join(unknown_duration)}")

    selected: set[str] = set()
    corpus_sizes = Counter(record.corpus for record in records)
    for corpus in sorted(budgets):
        if corpus not in corpus_sizes:
            continue
        budget_s = budgets[corpus] * SECONDS_PER_HOUR
        rng = np.random.default_rng(stable_seed(seed, corpus))
        total_s = 0.0
        count = 0
        for record in _stratified_order([r for r in records if r.corpus == corpus], rng):
            duration = record.duration_s or 0.0
            if total_s + duration > budget_s:
                break
            total_s += duration
            count += 1
            selected.add(record.utterance_id)
        logger.info("Capped %s to %.2f h (%d utterances)", corpus, total_s / SECONDS_PER_HOUR, count)

    return [record for record in records if record.corpus not in budgets or record.utterance_id in selected]
