"""Batch evaluation of enhanced audio against manifest references."""

import functools
import logging
from collections.abc import Callable, Mapping
from pathlib import Path

from tqdm.contrib.concurrent import process_map

from urgentkit.core.audio import AudioSignal, read_wav
from urgentkit.core.errors import MissingFilesError
from urgentkit.core.resample import resample
from urgentkit.corpus.manifest import UtteranceRecord, read_manifest
from urgentkit.metrics.descriptor import SIGNAL_METRICS, MetricDescriptor
from urgentkit.metrics.estoi import estoi
from urgentkit.metrics.signal import lsd, mcd, sdr
from urgentkit.metrics.table import ScoreEntry, ScoreTable

logger = logging.getLogger(__name__)

MetricFunction = Callable[[AudioSignal, AudioSignal], float]


def get_metric_function(name: str) -> MetricFunction:
    """Return the function computing the signal metric `name`."""
    match name:
        case "SDR":
            return sdr
        case "LSD":
            return lsd
        case "MCD":
            return mcd
        case "ESTOI":
            return estoi
        case _:
            raise NotImplementedError(f"Metric {name} is not computed from signal pairs")


def enhanced_path(system_dir: Path, utterance_id: str) -> Path:
    return system_dir / f"{utterance_id}.wav"


def score_pair(task: tuple[str, str, Path, Path], metric_names: tuple[str, ...]) -> list[tuple[str, str, str, float]]:
    """Score one (system, utterance) pair; the estimate is resampled to the reference rate."""
    system_id, utterance_id, reference_path, estimate_path = task
    reference = read_wav(reference_path)
    estimate = read_wav(estimate_path)
    if estimate.rate_hz != reference.rate_hz:
        logger.debug("%s/%s: resampling %d Hz -> %d Hz", system_id, utterance_id, estimate.rate_hz, reference.rate_hz)
        estimate = resample(estimate, reference.rate_hz)
    return [(system_id, utterance_id, name, get_metric_function(name)(reference, estimate)) for name in metric_names]


def evaluate_manifest(
    manifest: str | Path | list[UtteranceRecord],
    systems: Mapping[str, str | Path],
    metrics: list[MetricDescriptor],
    workers: int = 1,
) -> ScoreTable:
    """Score every system's `<utterance_id>.wav` against the manifest references.

    All missing files are reported in a single MissingFilesError before any scoring starts.
    The table does not depend on the worker count.
    """
    records = read_manifest(manifest) if isinstance(manifest, str | Path) else manifest
    unsupported = [metric.name for metric in metrics if metric.name not in SIGNAL_METRICS]
    if unsupported:
        raise ValueError(f"evaluate_manifest computes {', '.join(SIGNAL_METRICS)}; cannot compute {unsupported}")

    tasks: list[tuple[str, str, Path, Path]] = []
    missing: list[str] = []
    for system_id in sorted(systems):
        system_dir = Path(systems[system_id])
        for record in records:
            path = enhanced_path(system_dir, record.utterance_id)
            if not path.is_file():
                missing.append(str(path))
            tasks.append((system_id, record.utterance_id, record.path, path))
    missing.extend(str(record.path) for record in records if not record.path.is_file())
    if missing:
        raise MissingFilesError(missing)

    score = functools.partial(score_pair, metric_names=tuple(metric.name for metric in metrics))
    if workers > 1 and len(tasks) > 1:
        results = process_map(score, tasks, max_workers=workers, chunksize=1, desc="evaluate")
    else:
        results = [score(task) for task in tasks]

    descriptors = {metric.name: metric for metric in metrics}
    table = ScoreTable()
    for rows in results:
        for system_id, utterance_id, name, value in rows:
            entry = ScoreEntry(system_id=system_id, utterance_id=utterance_id, metric=name, value=value)
            table.add(entry, descriptors[name])
    logger.info("Scored %d utterance(s) for %d system(s)", len(records), len(systems))
    return table
