from pathlib import Path

import numpy as np
import pytest

from urgentkit.core.errors import CoverageError
from urgentkit.metrics.descriptor import METRIC_REGISTRY, METRICS, MetricDirection
from urgentkit.metrics.table import ScoreEntry, ScoreTable
from urgentkit.ranking.categories import default_category_config
from urgentkit.ranking.leaderboard import (
    build_leaderboard,
    category_mean_ranks,
    final_scores,
    language_means,
    leaderboard_header,
    rank_metric,
    render_leaderboard,
    system_metric_means,
    write_language_means_csv,
    write_leaderboard_csv,
)
from urgentkit.ranking.plot import plot_language_means, plot_leaderboard

# Per-metric ranks of five systems from a published leaderboard, in registry order:
# non-intrusive (3), intrusive (6), downstream-independent (2), downstream-dependent (2), MOS.
PUBLISHED_RANKS = {
    "T1": [8, 6, 5, 1, 1, 1, 1, 2, 3, 1, 1, 1, 1, 5],
    "T2": [5, 5, 3, 4, 4, 5, 5, 7, 8, 4, 5, 3, 6, 3],
    "T3": [4, 4, 2, 5, 6, 4, 4, 11, 12, 6, 3, 6, 5, 2],
    "T13": [1, 1, 1, 21, 21, 22, 22, 22, 22, 17, 18, 22, 21, 1],
    "T10": [10, 14, 16, 9, 10, 8, 9, 3, 1, 9, 8, 8, 7, 12],
}
PUBLISHED_SCORES = {"T1": 2.967, "T2": 4.367, "T3": 4.467, "T13": 12.533, "T10": 9.63}


def _table(values: dict[tuple[str, str, str], float]) -> ScoreTable:
    table = ScoreTable()
    for (system_id, utterance_id, metric), value in values.items():
        entry = ScoreEntry(system_id=system_id, utterance_id=utterance_id, metric=metric, value=value)
        table.add(entry, METRIC_REGISTRY[metric])
    return table


def _small_table() -> ScoreTable:
    """Three systems, two utterances, SDR and LSD."""
    return _table({
        ("a", "u1", "SDR"): 10.0,
        ("a", "u2", "SDR"): 14.0,
        ("b", "u1", "SDR"): 5.0,
        ("b", "u2", "SDR"): 7.0,
        ("c", "u1", "SDR"): 12.0,
        ("c", "u2", "SDR"): 12.0,
        ("a", "u1", "LSD"): 2.0,
        ("a", "u2", "LSD"): 2.0,
        ("b", "u1", "LSD"): 1.0,
        ("b", "u2", "LSD"): 1.0,
        ("c", "u1", "LSD"): 3.0,
        ("c", "u2", "LSD"): 3.0,
    })


class TestRankMetric:
    """Tests for rank_metric."""

    def test_higher_better(self) -> None:
        """Test that the largest mean ranks first."""
        assert rank_metric({"a": 3.0, "b": 1.0, "c": 2.0}, MetricDirection.HIGHER_BETTER) == {
            "a": 1.0,
            "b": 3.0,
            "c": 2.0,
        }

    def test_lower_better(self) -> None:
        """Test that the smallest mean ranks first."""
        assert rank_metric({"a": 3.0, "b": 1.0, "c": 2.0}, MetricDirection.LOWER_BETTER) == {
            "a": 3.0,
            "b": 1.0,
            "c": 2.0,
        }

    def test_ties_share_average_position(self) -> None:
        """Test fractional ranks for exact ties."""
        ranks = rank_metric({"a": 1.0, "b": 1.0, "c": 0.0, "d": 1.0}, MetricDirection.HIGHER_BETTER)
        assert ranks == {"a": 2.0, "b": 2.0, "d": 2.0, "c": 4.0}

    def test_empty(self) -> None:
        """Test that no systems give no ranks."""
        assert rank_metric({}, MetricDirection.HIGHER_BETTER) == {}

    def test_random_tables(self) -> None:
        """Test rank sums and invariance under increasing transforms on 200 random tables."""
        rng = np.random.default_rng(0)
        for _ in range(200):
            n = int(rng.integers(1, 12))
            values = np.round(rng.normal(size=n), 1)
            means = {f"s{i}": float(v) for i, v in enumerate(values)}
            for direction in MetricDirection:
                ranks = rank_metric(means, direction)
                assert sum(ranks.values()) == pytest.approx(n * (n + 1) / 2)
                assert all(1.0 <= rank <= n for rank in ranks.values())
                transformed = {key: float(np.exp(value)) * 3 + 1 for key, value in means.items()}
                assert rank_metric(transformed, direction) == ranks


class TestPublishedLeaderboard:
    """Category and final scores for published per-metric ranks."""

    def _ranks(self) -> dict[str, dict[str, float]]:
        return {
            metric.name: {system_id: float(ranks[i]) for system_id, ranks in PUBLISHED_RANKS.items()}
            for i, metric in enumerate(METRICS)
        }

    def test_category_ranks(self) -> None:
        """Test two category means."""
        categories = category_mean_ranks(self._ranks(), default_category_config())
        assert categories[("T1", "intrusive")] == pytest.approx(1.5)
        assert categories[("T13", "intrusive")] == pytest.approx(21.667, abs=1e-3)
        assert categories[("T2", "non_intrusive")] == pytest.approx(13 / 3)

    @pytest.mark.parametrize("system_id", ["T1", "T2", "T3", "T13"])
    def test_final_scores(self, system_id: str) -> None:
        """Test the final scores to the published precision."""
        scores = final_scores(category_mean_ranks(self._ranks(), default_category_config()))
        assert scores[system_id] == pytest.approx(PUBLISHED_SCORES[system_id], abs=5e-4)

    def test_rounded_published_score(self) -> None:
        """Test a published score whose printed category ranks were rounded."""
        scores = final_scores(category_mean_ranks(self._ranks(), default_category_config()))
        assert scores["T10"] == pytest.approx(9.6)
        assert scores["T10"] == pytest.approx(PUBLISHED_SCORES["T10"], abs=0.05)

    def test_order(self) -> None:
        """Test the ordering of the five systems."""
        scores = final_scores(category_mean_ranks(self._ranks(), default_category_config()))
        assert sorted(scores, key=scores.__getitem__) == ["T1", "T2", "T3", "T10", "T13"]

    def test_missing_metric(self) -> None:
        """Test that a configured metric without ranks is a coverage error."""
        ranks = self._ranks()
        del ranks["MOS"]
        with pytest.raises(CoverageError, match="no ranks for metric\\(s\\): MOS"):
            category_mean_ranks(ranks, default_category_config())


class TestBuildLeaderboard:
    """Tests for build_leaderboard."""

    def test_small_table(self) -> None:
        """Test means, ranks, category ranks and ordering."""
        board = build_leaderboard(_small_table(), default_category_config(["SDR", "LSD"]))
        assert board.metrics == ["SDR", "LSD"]
        assert board.categories == ["intrusive"]
        # SDR means a=12, b=6, c=12; LSD means a=2, b=1, c=3
        assert board.row("a").ranks == {"SDR": 1.5, "LSD": 2.0}
        assert board.row("b").ranks == {"SDR": 3.0, "LSD": 1.0}
        assert board.row("c").ranks == {"SDR": 1.5, "LSD": 3.0}
        assert board.systems == ["a", "b", "c"]
        assert board.row("a").final_score == pytest.approx(1.75)
        with pytest.raises(KeyError):
            board.row("z")

    def test_ties_broken_by_system_id(self) -> None:
        """Test that equal final scores are ordered by system id."""
        table = _table({("z", "u", "SDR"): 1.0, ("y", "u", "SDR"): 1.0})
        board = build_leaderboard(table, default_category_config(["SDR"]))
        assert board.systems == ["y", "z"]

    def test_affine_invariance(self) -> None:
        """Test that a positive affine change of one metric's scores keeps every rank."""
        table = _small_table()
        scaled = _table({
            key: (3.0 * value - 7.0 if key[2] == "SDR" else value) for key, value in table.entries.items()
        })
        config = default_category_config(["SDR", "LSD"])
        first, second = build_leaderboard(table, config), build_leaderboard(scaled, config)
        assert [row.ranks for row in first.rows] == [row.ranks for row in second.rows]

    def test_coverage(self) -> None:
        """Test that a system lacking a ranked metric is a coverage error."""
        table = _table({("a", "u", "SDR"): 1.0, ("a", "u", "LSD"): 1.0, ("b", "u", "SDR"): 2.0})
        with pytest.raises(CoverageError, match="system 'b' has no LSD scores"):
            build_leaderboard(table, default_category_config(["SDR", "LSD"]))

    def test_language_filter(self) -> None:
        """Test ranking on the utterances of one language."""
        languages = {"u1": "de", "u2": "en"}
        board = build_leaderboard(
            _small_table(), default_category_config(["SDR"]), language_filter="en", languages=languages
        )
        assert board.language == "en"
        assert board.row("a").means == {"SDR": 14.0}
        assert board.systems[0] == "a"

    def test_language_filter_needs_languages(self) -> None:
        """Test that a filter without utterance languages is refused."""
        with pytest.raises(ValueError, match="needs the utterance languages"):
            system_metric_means(_small_table(), language_filter="en")

    def test_language_coverage(self) -> None:
        """Test that a missing language is reported."""
        with pytest.raises(CoverageError, match="for language 'ja'"):
            system_metric_means(_small_table(), ["SDR"], language_filter="ja", languages={"u1": "de"})


class TestLanguageMeans:
    """Tests for language_means."""

    def test_per_language(self) -> None:
        """Test one mean table per language tag."""
        table = _small_table()
        means = language_means(table, {"u1": "de", "u2": "en"})
        assert sorted(means) == ["de", "en"]
        assert means["de"][("a", "SDR")] == 10.0
        assert means["en"][("b", "LSD")] == 1.0

    def test_uncovered_pairs_left_out(self) -> None:
        """Test that a system without scores in a language is absent from its table."""
        table = _table({("a", "u1", "SDR"): 1.0, ("b", "u2", "SDR"): 2.0})
        means = language_means(table, {"u1": "de"})
        assert means == {"de": {("a", "SDR"): 1.0}, "unknown": {("b", "SDR"): 2.0}}


class TestOutputs:
    """Tests for the CSV, text and figure outputs."""

    def test_csv(self, tmp_path: Path) -> None:
        """Test the leaderboard CSV header and row order."""
        board = build_leaderboard(_small_table(), default_category_config(["SDR", "LSD"]))
        write_leaderboard_csv(board, tmp_path / "board.csv")
        lines = (tmp_path / "board.csv").read_text(encoding="utf-8").splitlines()
        assert lines[0] == ",".join(leaderboard_header(board))
        assert lines[0] == "system_id,SDR,LSD,SDR_rank,LSD_rank,intrusive_rank,final_score"
        assert [line.split(",")[0] for line in lines[1:]] == ["a", "b", "c"]
        assert lines[1] == "a,12.0,2.0,1.5,2.0,1.75,1.75"

    def test_language_csv(self, tmp_path: Path) -> None:
        """Test that missing cells are left empty."""
        write_language_means_csv({("a", "SDR"): 1.5, ("b", "LSD"): 2.0}, tmp_path / "de.csv")
        assert (tmp_path / "de.csv").read_text(encoding="utf-8") == "system_id,LSD,SDR\na,,1.5\nb,2.0,\n"

    def test_render(self) -> None:
        """Test the plain-text table."""
        text = render_leaderboard(build_leaderboard(_small_table(), default_category_config(["SDR", "LSD"])))
        assert "Leaderboard" in text
        assert "12.00 (1.5)" in text
        assert "1.00 (1)" in text
        assert "\x1b[" not in text

    def test_plots(self, tmp_path: Path) -> None:
        """Test that both figures are written as PNG files."""
        table = _small_table()
        board = build_leaderboard(table, default_category_config(["SDR", "LSD"]))
        plot_leaderboard(board, tmp_path / "board.png")
        plot_language_means(language_means(table, {"u1": "de", "u2": "en"}), "SDR", tmp_path / "sdr.png")
        for name in ("board.png", "sdr.png"):
            assert (tmp_path / name).read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"

    def test_plot_unknown_metric(self, tmp_path: Path) -> None:
        """Test that plotting a metric without means is refused."""
        with pytest.raises(ValueError, match="no MOS means"):
            plot_language_means({"de": {("a", "SDR"): 1.0}}, "MOS", tmp_path / "mos.png")
