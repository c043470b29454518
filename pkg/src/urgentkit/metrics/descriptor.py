"""Metric descriptors and the registry of the fourteen leaderboard metrics.

Five metrics are computed here (SDR, LSD, MCD, ESTOI, CAcc); the others come from
external tools or listening tests and are ingested from CSV files.
"""

from enum import StrEnum

from pydantic import BaseModel, ConfigDict, Field


class MetricDirection(StrEnum):
    HIGHER_BETTER = "higher_better"
    LOWER_BETTER = "lower_better"


class MetricCategory(StrEnum):
    """Leaderboard categories, each weighted equally in the final score."""

    NON_INTRUSIVE = "non_intrusive"
    INTRUSIVE = "intrusive"
    DOWNSTREAM_INDEPENDENT = "downstream_independent"
    DOWNSTREAM_DEPENDENT = "downstream_dependent"
    SUBJECTIVE = "subjective"


class MetricSource(StrEnum):
    COMPUTED = "computed"
    INGESTED = "ingested"


class MetricDescriptor(BaseModel):
    """Name, orientation, category and origin of a metric."""

    model_config = ConfigDict(frozen=True)

    name: str = Field(description="Unique metric name")
    direction: MetricDirection = Field(description="Whether larger values are better")
    category: MetricCategory = Field(description="Leaderboard category")
    source: MetricSource = Field(description="Computed by urgentkit or ingested from a file")


def _metric(name: str, direction: MetricDirection, category: MetricCategory, source: MetricSource) -> MetricDescriptor:
    return MetricDescriptor(name=name, direction=direction, category=category, source=source)


_HIGHER = MetricDirection.HIGHER_BETTER
_LOWER = MetricDirection.LOWER_BETTER

# In leaderboard column order
METRICS: tuple[MetricDescriptor, ...] = (
    _metric("DNSMOS", _HIGHER, MetricCategory.NON_INTRUSIVE, MetricSource.INGESTED),
    _metric("NISQA", _HIGHER, MetricCategory.NON_INTRUSIVE, MetricSource.INGESTED),
    _metric("UTMOS", _HIGHER, MetricCategory.NON_INTRUSIVE, MetricSource.INGESTED),
    _metric("POLQA", _HIGHER, MetricCategory.INTRUSIVE, MetricSource.INGESTED),
    _metric("PESQ", _HIGHER, MetricCategory.INTRUSIVE, MetricSource.INGESTED),
    _metric("ESTOI", _HIGHER, MetricCategory.INTRUSIVE, MetricSource.COMPUTED),
    _metric("SDR", _HIGHER, MetricCategory.INTRUSIVE, MetricSource.COMPUTED),
    _metric("MCD", _LOWER, MetricCategory.INTRUSIVE, MetricSource.COMPUTED),
    _metric("LSD", _LOWER, MetricCategory.INTRUSIVE, MetricSource.COMPUTED),
    _metric("SBS", _HIGHER, MetricCategory.DOWNSTREAM_INDEPENDENT, MetricSource.INGESTED),
    _metric("LPS", _HIGHER, MetricCategory.DOWNSTREAM_INDEPENDENT, MetricSource.INGESTED),
    _metric("SpkSim", _HIGHER, MetricCategory.DOWNSTREAM_DEPENDENT, MetricSource.INGESTED),
    _metric("CAcc", _HIGHER, MetricCategory.DOWNSTREAM_DEPENDENT, MetricSource.COMPUTED),
    _metric("MOS", _HIGHER, MetricCategory.SUBJECTIVE, MetricSource.INGESTED),
)

METRIC_REGISTRY: dict[str, MetricDescriptor] = {metric.name: metric for metric in METRICS}

# Metrics computed from a (reference, estimate) signal pair
SIGNAL_METRICS: tuple[str, ...] = ("SDR", "LSD", "MCD", "ESTOI")


def get_descriptor(name: str) -> MetricDescriptor:
    """Look up a registered metric by name."""
    if name not in METRIC_REGISTRY:
        raise ValueError(f"Unknown metric {name!r}; known metrics: {', '.join(METRIC_REGISTRY)}")
    return METRIC_REGISTRY[name]
