"""Corpus-level simulation: sample, apply and store a degradation chain per utterance.

Output layout under `out_dir`:

    degraded/<utterance_id>.wav
    reference/<utterance_id>.wav
    state/<utterance_id>.json     per-utterance metadata plus the resume hash
    metadata.jsonl                all metadata, sorted by utterance_id
    manifest.jsonl                reference manifest, usable by `evaluate`

Every output byte depends only on the inputs and the master seed, so the tree is the same for
any worker count, and a rerun skips utterances whose resume hash is unchanged.
"""

import functools
import hashlib
import json
import logging
from pathlib import Path

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, PositiveInt
from tqdm.contrib.concurrent import process_map

from urgentkit.core.audio import AudioSignal, WavEncoding, read_wav, write_wav
from urgentkit.core.errors import ConfigurationError
from urgentkit.core.resample import resample
from urgentkit.core.seeding import stable_seed
from urgentkit.corpus.manifest import UtteranceRecord, dump_manifest, read_manifest
from urgentkit.degrade.apply import ChainMetadata, apply_chain
from urgentkit.degrade.sampler import ChainSamplerConfig, sample_chain
from urgentkit.degrade.step import DegradationChain, DistortionKind
from urgentkit.distortions.base import DistortionResources

logger = logging.getLogger(__name__)

DEGRADED_DIR = "degraded"
REFERENCE_DIR = "reference"
STATE_DIR = "state"
METADATA_FILE = "metadata.jsonl"
MANIFEST_FILE = "manifest.jsonl"


class SimulationSettings(BaseModel):
    """Everything a worker needs to simulate one utterance."""

    model_config = ConfigDict(frozen=True)

    sampler: ChainSamplerConfig = Field(description="Chain sampler, including the master seed")
    noise: list[UtteranceRecord] = Field(default_factory=list, description="Noise recordings to draw from")
    rirs: list[UtteranceRecord] = Field(default_factory=list, description="Room impulse responses to draw from")
    out_dir: Path = Field(description="Root of the output tree")
    encoding: WavEncoding = Field(default=WavEncoding.FLOAT32, description="Encoding of written WAV files")


class SimulationOutcome(BaseModel):
    utterance_id: str
    metadata: ChainMetadata | None = None
    skipped: bool = False
    error: str | None = None


def pick_resource(records: list[UtteranceRecord], master_seed: int, utterance_id: str, role: str) -> UtteranceRecord:
    """Deterministically choose one resource record for an utterance."""
    if not records:
        raise ConfigurationError(f"{utterance_id}: no {role} resources configured")
    rng = np.random.default_rng(stable_seed(master_seed, f"{utterance_id}/{role}"))
    return records[int(rng.integers(len(records)))]


def _load_at_rate(path: Path, rate_hz: int) -> AudioSignal:
    signal = read_wav(path)
    if signal.rate_hz != rate_hz:
        logger.debug("Resampling %s from %d Hz to %d Hz", path, signal.rate_hz, rate_hz)
        signal = resample(signal, rate_hz)
    return signal


def resume_hash(chain: DegradationChain, source: Path, resources: dict[str, str], settings: SimulationSettings) -> str:
    """Hash of the chain, the chosen resources, codec commands and the input file's size and mtime."""
    stat = source.stat()
    payload = {
        "chain": chain.model_dump(mode="json"),
        "resources": resources,
        "codecs": {key: value.model_dump(mode="json") for key, value in sorted(settings.sampler.codecs.items())},
        "encoding": settings.encoding.value,
        "source": [stat.st_size, stat.st_mtime_ns],
    }
    return hashlib.blake2b(json.dumps(payload, sort_keys=True).encode(), digest_size=16).hexdigest()


def _output_paths(out_dir: Path, utterance_id: str) -> tuple[Path, Path, Path]:
    return (
        out_dir / DEGRADED_DIR / f"{utterance_id}.wav",
        out_dir / REFERENCE_DIR / f"{utterance_id}.wav",
        out_dir / STATE_DIR / f"{utterance_id}.json",
    )


def _read_state(path: Path) -> tuple[str, ChainMetadata] | None:
    if not path.is_file():
        return None
    try:
        state = json.loads(path.read_text(encoding="utf-8"))
        return state["hash"], ChainMetadata.model_validate(state["metadata"])
    except (ValueError, KeyError):
        logger.warning("Ignoring unreadable state file %s", path)
        return None


def simulate_utterance(record: UtteranceRecord, settings: SimulationSettings) -> SimulationOutcome:
    """Simulate one utterance; failures are returned, not raised."""
    utterance_id = record.utterance_id
    degraded_path, reference_path, state_path = _output_paths(settings.out_dir, utterance_id)
    try:
        clean = read_wav(record.path)
        chain = sample_chain(settings.sampler, utterance_id, rate_hz=clean.rate_hz)
        master_seed = settings.sampler.master_seed

        chosen: dict[str, str] = {}
        noise = rir = None
        if DistortionKind.ADDITIVE_NOISE in chain.kinds:
            noise_record = pick_resource(settings.noise, master_seed, utterance_id, "noise")
            chosen["noise"] = noise_record.utterance_id
        if DistortionKind.REVERBERATION in chain.kinds:
            rir_record = pick_resource(settings.rirs, master_seed, utterance_id, "rir")
            chosen["rir"] = rir_record.utterance_id

        digest = resume_hash(chain, record.path, chosen, settings)
        previous = _read_state(state_path)
        if previous is not None and previous[0] == digest and degraded_path.is_file() and reference_path.is_file():
            logger.debug("%s: outputs are up to date", utterance_id)
            return SimulationOutcome(utterance_id=utterance_id, metadata=previous[1], skipped=True)

        if "noise" in chosen:
            noise = _load_at_rate(noise_record.path, clean.rate_hz)
        if "rir" in chosen:
            rir = _load_at_rate(rir_record.path, clean.rate_hz)
        resources = DistortionResources(noise=noise, rir=rir, codec_templates=settings.sampler.codecs)
        result = apply_chain(clean, chain, resources)
        metadata = result.metadata.model_copy(update={"resources": chosen})

        write_wav(result.degraded, degraded_path, settings.encoding)
        write_wav(result.reference, reference_path, settings.encoding)
        state = {"hash": digest, "metadata": metadata.model_dump(mode="json")}
        state_path.write_text(json.dumps(state, sort_keys=True) + "\n", encoding="utf-8")
        return SimulationOutcome(utterance_id=utterance_id, metadata=metadata)
    except Exception as e:
        logger.exception("%s: simulation failed", utterance_id)
        return SimulationOutcome(utterance_id=utterance_id, error=f"{type(e).__name__}: {e}")


def _write_if_changed(path: Path, text: str) -> None:
    if path.is_file() and path.read_text(encoding="utf-8") == text:
        logger.debug("%s is up to date", path)
        return
    path.write_text(text, encoding="utf-8")


def simulate_corpus(
    manifest: str | Path | list[UtteranceRecord],
    settings: SimulationSettings,
    workers: PositiveInt = 1,
) -> list[SimulationOutcome]:
    """Simulate every utterance and write the combined metadata and reference manifest.

    Outcomes are sorted by utterance_id. The combined files list only successful utterances.
    """
    records = read_manifest(manifest) if isinstance(manifest, str | Path) else manifest
    for name in (DEGRADED_DIR, REFERENCE_DIR, STATE_DIR):
        (settings.out_dir / name).mkdir(parents=True, exist_ok=True)

    simulate = functools.partial(simulate_utterance, settings=settings)
    ordered = sorted(records, key=lambda record: record.utterance_id)
    if workers > 1 and len(ordered) > 1:
        outcomes = process_map(simulate, ordered, max_workers=workers, chunksize=1, desc="simulate")
    else:
        outcomes = [simulate(record) for record in ordered]

    by_id = {record.utterance_id: record for record in ordered}
    metadata_lines: list[str] = []
    references: list[UtteranceRecord] = []
    for outcome in outcomes:
        if outcome.metadata is None:
            continue
        metadata_lines.append(outcome.metadata.model_dump_json() + "\n")
        source = by_id[outcome.utterance_id]
        references.append(
            source.model_copy(
                update={
                    "path": Path(REFERENCE_DIR) / f"{outcome.utterance_id}.wav",
                    "assigned_rate_hz": outcome.metadata.output_rate_hz,
                }
            )
        )
    _write_if_changed(settings.out_dir / METADATA_FILE, "".join(metadata_lines))
    manifest_path = settings.out_dir / MANIFEST_FILE
    _write_if_changed(manifest_path, dump_manifest(references, manifest_path))

    skipped = sum(outcome.skipped for outcome in outcomes)
    failed = sum(outcome.error is not None for outcome in outcomes)
    logger.info(
        "Simulated %d utterance(s): %d written, %d up to date, %d failed",
        len(outcomes),
        len(outcomes) - skipped - failed,
        skipped,
        failed,
    )
    return outcomes
