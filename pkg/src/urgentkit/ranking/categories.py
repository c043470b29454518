"""Metric categories of the leaderboard and their TOML representation.

A category config lists the categories in display order, each with its metrics in display
order, plus the direction of every metric:

    [[categories]]
    name = "non_intrusive"
    metrics = ["DNSMOS", "NISQA", "UTMOS"]

    [directions]
    MCD = "lower_better"

Directions not given in the file are taken from the metric registry.
"""

import tomllib
from collections import Counter
from collections.abc import Iterable, Mapping
from pathlib import Path
from typing import Any, Self

from pydantic import BaseModel, Field, ValidationError, model_validator

from urgentkit.core.errors import ConfigurationError
from urgentkit.metrics.descriptor import METRIC_REGISTRY, METRICS, MetricDescriptor, MetricDirection


class Category(BaseModel):
    name: str = Field(description="Category name, used as a leaderboard column")
    metrics: list[str] = Field(description="Metric names in display order")


class CategoryConfig(BaseModel):
    """Ordered categories, each owning a disjoint non-empty set of metrics."""

    categories: list[Category] = Field(description="Categories in display order")
    directions: dict[str, MetricDirection] = Field(description="Direction of every categorized metric")

    @model_validator(mode="after")
    def _check(self) -> Self:
        if not self.categories:
            raise ValueError("at least one category is required")
        names = Counter(category.name for category in self.categories)
        repeated_names = sorted(name for name, count in names.items() if count > 1)
        if repeated_names:
            raise ValueError(f"duplicate category name(s): {', '.join(repeated_names)}")
        for category in self.categories:
            if not category.metrics:
                raise ValueError(f"category {category.name!r} has no metrics")
        occurrences = Counter(metric for category in self.categories for metric in category.metrics)
        repeated = sorted(metric for metric, count in occurrences.items() if count > 1)
        if repeated:
            raise ValueError(f"metric(s) in more than one category: {', '.join(repeated)}")
        undirected = [metric for metric in occurrences if metric not in self.directions]
        if undirected:
            raise ValueError(f"no direction for metric(s): {', '.join(undirected)}")
        return self

    @property
    def metrics(self) -> list[str]:
        """All categorized metrics, category by category."""
        return [metric for category in self.categories for metric in category.metrics]

    @property
    def category_names(self) -> list[str]:
        return [category.name for category in self.categories]

    def category_of(self, metric: str) -> str:
        for category in self.categories:
            if metric in category.metrics:
                return category.name
        raise KeyError(metric)


def default_category_config(metrics: Iterable[str] | None = None) -> CategoryConfig:
    """The five categories of the registered metrics, in leaderboard order.

    With `metrics`, only those metrics are kept and categories left empty are dropped.
    """
    wanted = None if metrics is None else set(metrics)
    descriptors = [descriptor for descriptor in METRICS if wanted is None or descriptor.name in wanted]
    if not descriptors:
        raise ConfigurationError("none of the given metrics is registered")
    categories: dict[str, list[str]] = {}
    for descriptor in descriptors:
        categories.setdefault(descriptor.category.value, []).append(descriptor.name)
    return CategoryConfig(
        categories=[Category(name=name, metrics=names) for name, names in categories.items()],
        directions={descriptor.name: descriptor.direction for descriptor in descriptors},
    )


def category_config_from_dict(
    data: Mapping[str, Any], registry: Mapping[str, MetricDescriptor] = METRIC_REGISTRY
) -> CategoryConfig:
    """Build a CategoryConfig, filling missing directions from `registry`.

    Raises ConfigurationError naming every metric unknown to `registry`.
    """
    raw_categories = data.get("categories", [])
    names = [metric for category in raw_categories for metric in category.get("metrics", [])]
    unknown = [name for name in names if name not in registry]
    if unknown:
        raise ConfigurationError(f"unknown metric(s) in category config: {', '.join(unknown)}")
    directions: dict[str, Any] = {name: registry[name].direction for name in names}
    directions.update(data.get("directions", {}))
    try:
        return CategoryConfig(categories=raw_categories, directions=directions)
    except ValidationError as e:
        raise ConfigurationError(f"invalid category config: {e}") from e


def load_category_config(
    path: str | Path, registry: Mapping[str, MetricDescriptor] = METRIC_REGISTRY
) -> CategoryConfig:
    """Read a category config TOML file."""
    path = Path(path)
    with path.open("rb") as stream:
        try:
            data = tomllib.load(stream)
        except tomllib.TOMLDecodeError as e:
            raise ConfigurationError(f"{path}: {e}") from e
    try:
        return category_config_from_dict(data, registry)
    except ConfigurationError as e:
        raise ConfigurationError(f"{path}: {e}") from e
