"""Codec loss through external encoder and decoder programs.

The signal is written to a WAV file, encoded and decoded by the commands of a CodecTemplate,
and read back. Scratch files live in a per-call directory under the work directory
(URGENTKIT_TMPDIR, or the system temp directory) and are removed afterwards. Failures are
never skipped: a missing program, a nonzero exit status or an unreadable result raises CodecError.
"""

import logging
import os
import shlex
import subprocess
import tempfile
from pathlib import Path
from typing import ClassVar, NamedTuple

from urgentkit.core.audio import AudioSignal, read_wav, write_wav
from urgentkit.core.errors import AudioFormatError, CodecError, ConfigurationError
from urgentkit.core.resample import resample
from urgentkit.degrade.step import CodecParams, DegradationStep, DistortionKind
from urgentkit.distortions.base import CodecTemplate, DistortionOutput, DistortionResources, IDistortion

logger = logging.getLogger(__name__)

TMPDIR_ENV = "URGENTKIT_TMPDIR"
# Stands in for the scratch directory in recorded commands
WORKDIR_TOKEN = "$WORKDIR"


class CodecResult(NamedTuple):
    signal: AudioSignal
    commands: list[str]


def codec_workdir(workdir: Path | None = None) -> Path | None:
    """Explicit workdir, else $URGENTKIT_TMPDIR, else None (system temp directory)."""
    if workdir is not None:
        return workdir
    env = os.environ.get(TMPDIR_ENV)
    return Path(env) if env else None


def render_command(template: str, input_path: Path, output_path: Path, bitrate_kbps: int) -> str:
    """Substitute the {in}, {out} and {bitrate} placeholders with shell-quoted values."""
    return (
        template.replace("{in}", shlex.quote(str(input_path)))
        .replace("{out}", shlex.quote(str(output_path)))
        .replace("{bitrate}", str(bitrate_kbps))
    )


def _run(command: str) -> None:
    logger.debug("Running %s", command)
    try:
        completed = subprocess.run(shlex.split(command), capture_output=True, text=True, check=False)
    except FileNotFoundError as e:
        raise CodecError(f"codec program not found: {e.filename}") from e
    if completed.returncode != 0:
        raise CodecError(f"{command!r} exited with status {completed.returncode}: {completed.stderr.strip()}")


def codec_external(
    signal: AudioSignal,
    codec_id: str,
    bitrate_kbps: int,
    command_templates: dict[str, CodecTemplate],
    workdir: Path | None = None,
) -> CodecResult:
    """Encode and decode `signal` with the external codec `codec_id`.

    The result has the rate and length of the input. Recorded commands show the scratch
    directory as $WORKDIR so that they do not depend on temp directory names.
    """
    if codec_id not in command_templates:
        raise ConfigurationError(f"no command template for codec {codec_id!r}")
    template = command_templates[codec_id]

    parent = codec_workdir(workdir)
    if parent is not None:
        parent.mkdir(parents=True, exist_ok=True)
    with tempfile.TemporaryDirectory(prefix=f"urgentkit-{codec_id}-", dir=parent) as tmp:
        scratch = Path(tmp)
        source = scratch / "input.wav"
        encoded = scratch / f"encoded.{template.extension}"
        decoded = scratch / "decoded.wav"
        write_wav(signal, source, template.input_encoding)

        commands = [
            render_command(template.encode, source, encoded, bitrate_kbps),
            render_command(template.decode, encoded, decoded, bitrate_kbps),
        ]
        for command in commands:
            _run(command)

        try:
            output = read_wav(decoded)
        except (AudioFormatError, FileNotFoundError) as e:
            raise CodecError(f"codec {codec_id!r} produced undecodable output: {e}") from e

    if output.rate_hz != signal.rate_hz:
        logger.debug("Codec %s changed the rate to %d Hz; resampling back", codec_id, output.rate_hz)
        output = resample(output, signal.rate_hz)
    recorded = [command.replace(shlex.quote(str(scratch)), WORKDIR_TOKEN) for command in commands]
    recorded = [command.replace(str(scratch), WORKDIR_TOKEN) for command in recorded]
    return CodecResult(signal=output.fit_length(len(signal)), commands=recorded)


class Codec(IDistortion):
    """External codec round trip at the step's bitrate."""

    kind: ClassVar[DistortionKind] = DistortionKind.CODEC

    @classmethod
    def _apply_original(
        cls, signal: AudioSignal, step: DegradationStep, resources: DistortionResources
    ) -> DistortionOutput:
        if not isinstance(step.params, CodecParams):
            raise TypeError(f"expected CodecParams, got {type(step.params).__name__}")
        result = codec_external(
            signal, step.params.codec_id, step.params.bitrate_kbps, resources.codec_templates, resources.workdir
        )
        return DistortionOutput(signal=result.signal, commands=result.commands)
