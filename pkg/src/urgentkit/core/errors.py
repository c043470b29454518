"""Exception types shared across urgentkit.

Most failures are plain ValueError/RuntimeError subclasses so callers can catch either the
specific type or the builtin family.
"""


class UrgentKitError(Exception):
    """Base class for all errors raised by urgentkit."""


class AudioFormatError(UrgentKitError, ValueError):
    """A WAV file cannot be decoded as a mono PCM16/PCM24/float32 RIFF file."""


class UnsupportedEncodingError(AudioFormatError):
    """The file is not RIFF/WAVE or uses an encoding other than PCM16, PCM24 or float32."""


class ChannelCountError(AudioFormatError):
    """The file has more than one channel."""


class TruncatedFileError(AudioFormatError):
    """The data chunk is shorter than its header declares."""


class EmptyAudioError(AudioFormatError):
    """The file (or signal) has no samples."""


class SilentSignalError(UrgentKitError, ValueError):
    """A signal that must carry energy is all zeros."""


class RateMismatchError(UrgentKitError, ValueError):
    """Two signals that must share a sampling rate do not."""


class ConfigurationError(UrgentKitError, ValueError):
    """A configuration value is missing or inconsistent."""


class CodecError(UrgentKitError, RuntimeError):
    """An external codec command failed or produced undecodable output."""


class StepError(UrgentKitError, RuntimeError):
    """A degradation step failed; carries the utterance and the step kind."""

    def __init__(self, utterance_id: str, kind: str, cause: BaseException) -> None:
        super().__init__(f"{utterance_id}: {kind} step failed: {cause}")
        self.utterance_id = utterance_id
        self.kind = kind
        self.cause = cause


class MissingFilesError(UrgentKitError, FileNotFoundError):
    """One or more expected files do not exist; every missing path is listed."""

    def __init__(self, paths: list[str]) -> None:
        listing = "\n  ".join(paths)
        super().__init__(f"{len(paths)} missing file(s):\n  {listing}")
        self.paths = paths


class ScoreFormatError(UrgentKitError, ValueError):
    """A score or transcript CSV row is malformed."""

    def __init__(self, path: str, line: int, reason: str) -> None:
        super().__init__(f"{path}:{line}: {reason}")
        self.path = path
        self.line = line


class DuplicateScoreError(UrgentKitError, ValueError):
    """The same (system, utterance, metric) key was given more than once."""


class CoverageError(UrgentKitError, ValueError):
    """A system lacks values for a metric that is ranked."""
