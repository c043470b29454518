from urgentkit.core.audio import AudioSignal, WavEncoding, read_wav, write_wav
from urgentkit.corpus.preprocess import preprocess_corpus
from urgentkit.degrade.apply import apply_chain
from urgentkit.degrade.sampler import ChainSamplerConfig, sample_chain
from urgentkit.degrade.step import DegradationChain, DistortionKind
from urgentkit.metrics.evaluate import evaluate_manifest
from urgentkit.metrics.table import ScoreTable
from urgentkit.ranking.categories import CategoryConfig
from urgentkit.ranking.leaderboard import Leaderboard, build_leaderboard

__all__ = [
    "AudioSignal",
    "CategoryConfig",
    "ChainSamplerConfig",
    "DegradationChain",
    "DistortionKind",
    "Leaderboard",
    "ScoreTable",
    "WavEncoding",
    "apply_chain",
    "build_leaderboard",
    "evaluate_manifest",
    "preprocess_corpus",
    "read_wav",
    "sample_chain",
    "write_wav",
]
