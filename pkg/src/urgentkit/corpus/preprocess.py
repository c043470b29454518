"""Corpus preprocessing: resample each utterance to the lowest rate covering its bandwidth, then filter and cap.

Per-record analysis runs in a process pool; output order always equals manifest order.
"""

import functools
import logging
from collections.abc import Mapping
from pathlib import Path

from pydantic import BaseModel, PositiveInt
from tqdm.contrib.concurrent import process_map

from urgentkit.core.audio import CHALLENGE_RATES, AudioSignal, WavEncoding, read_wav, write_wav
from urgentkit.core.errors import AudioFormatError
from urgentkit.core.resample import resample
from urgentkit.corpus.analysis import SpeechActivity, effective_bandwidth, lowest_covering_sf, vad_speech_ratio
from urgentkit.corpus.filtering import FilterReport, FilterRules, cap_duration, filter_corpus
from urgentkit.corpus.manifest import UtteranceRecord, read_manifest, write_manifest

logger = logging.getLogger(__name__)


class PreparedUtterance(BaseModel):
    """Result of preparing one record; `record` is None when its audio could not be read."""

    source: UtteranceRecord
    record: UtteranceRecord | None = None
    activity: tuple[float, float] | None = None
    error: str | None = None


def assigned_rate(signal: AudioSignal) -> int:
    """Lowest challenge rate covering the effective bandwidth.

    Full-band audio is never upsampled: the rate is capped at the highest challenge rate not above
    the source rate.
    """
    covering = lowest_covering_sf(max(effective_bandwidth(signal), 1.0))
    if covering <= signal.rate_hz:
        return covering
    return max((rate for rate in CHALLENGE_RATES if rate <= signal.rate_hz), default=CHALLENGE_RATES[0])


def prepare_utterance(record: UtteranceRecord, out_dir: Path, encoding: WavEncoding) -> PreparedUtterance:
    """Detect bandwidth, resample to the covering rate and write `<utterance_id>.wav` under out_dir."""
    try:
        signal = read_wav(record.path)
        rate = assigned_rate(signal)
    except (AudioFormatError, FileNotFoundError, ValueError) as e:
        logger.error("Skipping %s: %s", record.utterance_id, e)
        return PreparedUtterance(source=record, error=str(e))

    resampled = resample(signal, rate)
    out_path = out_dir / f"{record.utterance_id}.wav"
    write_wav(resampled, out_path, encoding)
    logger.debug("%s: %d Hz -> %d Hz", record.utterance_id, signal.rate_hz, rate)

    activity = vad_speech_ratio(resampled)
    prepared = record.model_copy(
        update={"path": out_path, "assigned_rate_hz": rate, "duration_s": resampled.duration_s}
    )
    return PreparedUtterance(source=record, record=prepared, activity=(activity.ratio, activity.active_s))


def preprocess_corpus(
    manifest_in: str | Path | list[UtteranceRecord],
    manifest_out: str | Path,
    out_dir: str | Path,
    rules: FilterRules,
    budgets: Mapping[str, float],
    seed: int = 0,
    workers: PositiveInt = 1,
    encoding: WavEncoding = WavEncoding.FLOAT32,
) -> FilterReport:
    """Prepare every utterance of manifest_in (a path or records) and write the survivors to manifest_out."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    records = read_manifest(manifest_in) if isinstance(manifest_in, str | Path) else manifest_in

    prepare = functools.partial(prepare_utterance, out_dir=out_dir, encoding=encoding)
    if workers > 1 and len(records) > 1:
        results = process_map(prepare, records, max_workers=workers, chunksize=1, desc="prep")
    else:
        results = [prepare(record) for record in records]

    unreadable = [result.source for result in results if result.record is None]
    prepared = [result.record for result in results if result.record is not None]
    activity = {
        result.source.utterance_id: SpeechActivity(*result.activity)
        for result in results
        if result.activity is not None
    }

    kept, report = filter_corpus(prepared, rules, activity=activity)
    for record in unreadable:
        report.tally(record, "dropped_unreadable")
    capped = cap_duration(kept, budgets, seed)
    kept_ids = {record.utterance_id for record in capped}
    report.recount_kept([record for record in kept if record.utterance_id not in kept_ids], "dropped_by_cap")

    for record in prepared:
        if record.utterance_id not in kept_ids:
            record.path.unlink(missing_ok=True)
    write_manifest(capped, manifest_out)
    logger.info("Wrote %d of %d utterances to %s", len(capped), len(records), manifest_out)
    return report
