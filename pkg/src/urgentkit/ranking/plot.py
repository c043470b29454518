"""Leaderboard figures: a rank heat-map and per-language bar charts."""

from collections.abc import Mapping
from pathlib import Path

import matplotlib.pyplot as plt
import numpy as np

from urgentkit.ranking.leaderboard import Leaderboard, MeanKey


def plot_leaderboard(board: Leaderboard, path: str | Path) -> None:
    """Save a systems x metrics heat-map of ranks (darker is better), rows in leaderboard order."""
    ranks = np.array([[row.ranks[metric] for metric in board.metrics] for row in board.rows], dtype=np.float64)
    labels = [f"{row.system_id} ({row.final_score:.2f})" for row in board.rows]

    plt.figure(figsize=(max(8, len(board.metrics) * 0.9), max(4, len(board.rows) * 0.5)))
    plt.imshow(ranks, cmap="viridis", aspect="auto")
    plt.colorbar(label="rank")
    plt.xticks(range(len(board.metrics)), board.metrics, rotation=45, ha="right")
    plt.yticks(range(len(labels)), labels)
    for i, row in enumerate(ranks):
        for j, rank in enumerate(row):
            plt.text(j, i, f"{rank:g}", ha="center", va="center", color="white", fontsize=8)
    title = "Per-metric ranks" if board.language is None else f"Per-metric ranks ({board.language})"
    plt.title(title)
    plt.tight_layout()
    plt.savefig(path, dpi=150, bbox_inches="tight")
    plt.close()


def plot_language_means(means_by_language: Mapping[str, Mapping[MeanKey, float]], metric: str, path: str | Path) -> None:
    """Save a grouped bar chart of one metric's per-language means, one bar group per language."""
    languages = sorted(means_by_language)
    systems = sorted({
        system_id for means in means_by_language.values() for system_id, name in means if name == metric
    })
    if not systems:
        raise ValueError(f"no {metric} means to plot")

    width = 0.8 / len(systems)
    positions = np.arange(len(languages), dtype=np.float64)
    plt.figure(figsize=(max(6, len(languages) * 1.2), 4))
    cmap = plt.get_cmap("tab10")
    for k, system_id in enumerate(systems):
        heights = [means_by_language[tag].get((system_id, metric), np.nan) for tag in languages]
        plt.bar(positions + k * width, heights, width=width, label=system_id, color=cmap(k % 10))
    plt.xticks(positions + 0.4 - width / 2, languages)
    plt.ylabel(metric)
    plt.title(f"{metric} by language")
    plt.legend(fontsize=8)
    plt.tight_layout()
    plt.savefig(path, dpi=150, bbox_inches="tight")
    plt.close()
