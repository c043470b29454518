"""Friedman-style leaderboard.

Each metric ranks the systems by their mean score (ties share the average position), the
ranks are averaged within each category, and the category ranks are averaged into the final
score. Lower final scores are better.
"""

import csv
import io
import logging
from collections import defaultdict
from collections.abc import Mapping, Sequence
from pathlib import Path

import numpy as np
from pydantic import BaseModel, Field
from rich import box
from rich.console import Console
from rich.table import Table
from scipy.stats import rankdata

from urgentkit.core.errors import CoverageError
from urgentkit.metrics.descriptor import MetricDirection
from urgentkit.metrics.table import ScoreTable
from urgentkit.ranking.categories import CategoryConfig

logger = logging.getLogger(__name__)

MeanKey = tuple[str, str]


class LeaderboardRow(BaseModel):
    system_id: str = Field(description="System identifier")
    means: dict[str, float] = Field(description="Mean score per metric")
    ranks: dict[str, float] = Field(description="Fractional rank per metric")
    category_ranks: dict[str, float] = Field(description="Mean rank per category")
    final_score: float = Field(description="Mean of the category ranks; lower is better")


class Leaderboard(BaseModel):
    """Rows ordered by ascending final score, ties by system_id."""

    metrics: list[str] = Field(description="Ranked metrics in display order")
    categories: list[str] = Field(description="Categories in display order")
    rows: list[LeaderboardRow] = Field(description="One row per system")
    language: str | None = Field(default=None, description="Language the scores were restricted to, if any")

    @property
    def systems(self) -> list[str]:
        return [row.system_id for row in self.rows]

    def row(self, system_id: str) -> LeaderboardRow:
        for row in self.rows:
            if row.system_id == system_id:
                return row
        raise KeyError(system_id)


def _grouped_values(
    table: ScoreTable,
    language_filter: str | None,
    languages: Mapping[str, str] | None,
) -> dict[MeanKey, list[float]]:
    if language_filter is not None and languages is None:
        raise ValueError("a language filter needs the utterance languages")
    grouped: dict[MeanKey, list[float]] = defaultdict(list)
    for (system_id, utterance_id, metric), value in sorted(table.entries.items()):
        if languages is not None and language_filter is not None and languages.get(utterance_id, "unknown") != language_filter:
            continue
        grouped[(system_id, metric)].append(value)
    return grouped


def system_metric_means(
    table: ScoreTable,
    metrics: Sequence[str] | None = None,
    language_filter: str | None = None,
    languages: Mapping[str, str] | None = None,
) -> dict[MeanKey, float]:
    """Mean score per (system, metric) over the utterances each metric covers.

    With `language_filter`, only utterances whose language in `languages` matches are used.
    Every system of the table must have at least one value for every metric in `metrics`
    (default: all metrics of the table), otherwise CoverageError is raised.
    """
    grouped = _grouped_values(table, language_filter, languages)
    wanted = list(metrics) if metrics is not None else table.metrics
    means: dict[MeanKey, float] = {}
    for system_id in table.systems:
        for metric in wanted:
            values = grouped.get((system_id, metric))
            if not values:
                where = f" for language {language_filter!r}" if language_filter is not None else ""
                raise CoverageError(f"system {system_id!r} has no {metric} scores{where}")
            means[(system_id, metric)] = float(np.mean(values))
    return means


def language_means(table: ScoreTable, languages: Mapping[str, str]) -> dict[str, dict[MeanKey, float]]:
    """Per-language mean tables; (system, metric) pairs without scores in a language are left out."""
    tags = sorted({languages.get(utterance_id, "unknown") for _, utterance_id, _ in table.entries})
    result: dict[str, dict[MeanKey, float]] = {}
    for tag in tags:
        grouped = _grouped_values(table, tag, languages)
        result[tag] = {key: float(np.mean(values)) for key, values in sorted(grouped.items())}
    return result


def rank_metric(means: Mapping[str, float], direction: MetricDirection) -> dict[str, float]:
    """Rank 1 for the best mean; exact ties get the average of the positions they span."""
    if not means:
        return {}
    systems = sorted(means)
    values = np.array([means[system_id] for system_id in systems], dtype=np.float64)
    match direction:
        case MetricDirection.HIGHER_BETTER:
            ranks = rankdata(-values, method="average")
        case MetricDirection.LOWER_BETTER:
            ranks = rankdata(values, method="average")
        case _:
            raise NotImplementedError(f"Direction {direction} is not supported")
    return {system_id: float(rank) for system_id, rank in zip(systems, ranks, strict=True)}


def category_mean_ranks(ranks: Mapping[str, Mapping[str, float]], config: CategoryConfig) -> dict[MeanKey, float]:
    """Mean of each category's metric ranks, per (system, category)."""
    missing = [metric for metric in config.metrics if metric not in ranks]
    if missing:
        raise CoverageError(f"no ranks for metric(s): {', '.join(missing)}")
    systems = sorted({system_id for metric in config.metrics for system_id in ranks[metric]})
    result: dict[MeanKey, float] = {}
    for system_id in systems:
        for category in config.categories:
            values = []
            for metric in category.metrics:
                if system_id not in ranks[metric]:
                    raise CoverageError(f"system {system_id!r} has no rank for {metric}")
                values.append(ranks[metric][system_id])
            result[(system_id, category.name)] = float(np.mean(values))
    return result


def final_scores(category_ranks: Mapping[MeanKey, float]) -> dict[str, float]:
    """Mean over categories of each system's category ranks."""
    by_system: dict[str, dict[str, float]] = defaultdict(dict)
    for (system_id, category), rank in category_ranks.items():
        by_system[system_id][category] = rank
    categories = {category for _, category in category_ranks}
    scores: dict[str, float] = {}
    for system_id in sorted(by_system):
        lacking = sorted(categories - set(by_system[system_id]))
        if lacking:
            raise CoverageError(f"system {system_id!r} has no rank for categories {', '.join(lacking)}")
        scores[system_id] = float(np.mean([by_system[system_id][category] for category in sorted(categories)]))
    return scores


def build_leaderboard(
    table: ScoreTable,
    config: CategoryConfig,
    language_filter: str | None = None,
    languages: Mapping[str, str] | None = None,
) -> Leaderboard:
    """Rank every system of `table` on the metrics of `config`."""
    means = system_metric_means(table, config.metrics, language_filter, languages)
    systems = table.systems
    ranks = {
        metric: rank_metric({system_id: means[(system_id, metric)] for system_id in systems}, config.directions[metric])
        for metric in config.metrics
    }
    categories = category_mean_ranks(ranks, config)
    scores = final_scores(categories)

    rows = [
        LeaderboardRow(
            system_id=system_id,
            means={metric: means[(system_id, metric)] for metric in config.metrics},
            ranks={metric: ranks[metric][system_id] for metric in config.metrics},
            category_ranks={name: categories[(system_id, name)] for name in config.category_names},
            final_score=scores[system_id],
        )
        for system_id in systems
    ]
    rows.sort(key=lambda row: (row.final_score, row.system_id))
    logger.info("Ranked %d system(s) on %d metric(s)", len(rows), len(config.metrics))
    return Leaderboard(metrics=config.metrics, categories=config.category_names, rows=rows, language=language_filter)


def leaderboard_header(board: Leaderboard) -> list[str]:
    return [
        "system_id",
        *board.metrics,
        *(f"{metric}_rank" for metric in board.metrics),
        *(f"{category}_rank" for category in board.categories),
        "final_score",
    ]


def write_leaderboard_csv(board: Leaderboard, path: str | Path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as stream:
        writer = csv.writer(stream, lineterminator="\n")
        writer.writerow(leaderboard_header(board))
        for row in board.rows:
            writer.writerow([
                row.system_id,
                *(repr(row.means[metric]) for metric in board.metrics),
                *(repr(row.ranks[metric]) for metric in board.metrics),
                *(repr(row.category_ranks[category]) for category in board.categories),
                repr(row.final_score),
            ])


def write_language_means_csv(means: Mapping[MeanKey, float], path: str | Path) -> None:
    """One row per system, one column per metric; missing cells are left empty."""
    systems = sorted({system_id for system_id, _ in means})
    metrics = sorted({metric for _, metric in means})
    with Path(path).open("w", newline="", encoding="utf-8") as stream:
        writer = csv.writer(stream, lineterminator="\n")
        writer.writerow(["system_id", *metrics])
        for system_id in systems:
            cells = [repr(means[(system_id, m)]) if (system_id, m) in means else "" for m in metrics]
            writer.writerow([system_id, *cells])


def _format_rank(rank: float) -> str:
    return f"{rank:g}"


def leaderboard_table(board: Leaderboard) -> Table:
    """Aligned table with `mean (rank)` cells, category ranks and the final score."""
    title = "Leaderboard" if board.language is None else f"Leaderboard ({board.language})"
    table = Table(title=title, box=box.SIMPLE_HEAVY)
    table.add_column("System", style="bold cyan", no_wrap=True)
    for metric in board.metrics:
        table.add_column(metric, justify="right")
    for category in board.categories:
        table.add_column(category, justify="right")
    table.add_column("Score", justify="right", style="bold")
    for row in board.rows:
        table.add_row(
            row.system_id,
            *(f"{row.means[metric]:.2f} ({_format_rank(row.ranks[metric])})" for metric in board.metrics),
            *(f"{row.category_ranks[category]:.2f}" for category in board.categories),
            f"{row.final_score:.2f}",
        )
    return table


def render_leaderboard(board: Leaderboard, width: int = 240) -> str:
    """Plain-text rendering of `leaderboard_table`."""
    stream = io.StringIO()
    Console(file=stream, width=width, color_system=None, force_terminal=False).print(leaderboard_table(board))
    return stream.getvalue()
