"""Command-line entry point: `urgentkit {prep,simulate,evaluate,rank,validate}`.

Results (JSON report, leaderboard text, dry-run plans, validation problems) go to standard
output; logs go to standard error. The exit status is 0 iff no hard error occurred.
"""

import argparse
import json
import logging
import sys
from collections.abc import Sequence
from pathlib import Path

from pydantic import ValidationError

from urgentkit.config import RunConfig, load_run_config, missing_inputs
from urgentkit.core.audio import is_challenge_rate
from urgentkit.core.errors import ConfigurationError, UrgentKitError
from urgentkit.corpus.manifest import UtteranceRecord, attach_external_scores, read_external_scores, read_manifest
from urgentkit.corpus.preprocess import preprocess_corpus
from urgentkit.degrade.simulate import SimulationSettings, simulate_corpus
from urgentkit.metrics.descriptor import METRIC_REGISTRY, get_descriptor
from urgentkit.metrics.evaluate import evaluate_manifest
from urgentkit.metrics.table import ScoreTable, ingest_scores, read_score_table, write_score_table
from urgentkit.metrics.text import read_transcripts, score_transcripts
from urgentkit.ranking.categories import CategoryConfig, default_category_config, load_category_config
from urgentkit.ranking.leaderboard import (
    build_leaderboard,
    language_means,
    render_leaderboard,
    write_language_means_csv,
    write_leaderboard_csv,
)
from urgentkit.ranking.plot import plot_language_means, plot_leaderboard

logger = logging.getLogger(__name__)


def _print_plan(command: str, **plan: object) -> None:
    print(json.dumps({"command": command, "dry_run": True, **plan}, indent=2, sort_keys=True, default=str))


def _report_problems(problems: list[str]) -> int:
    for problem in problems:
        logger.error("%s", problem)
    return 1 if problems else 0


def _missing_audio_dirs(records: list[UtteranceRecord]) -> list[str]:
    directories = sorted({record.path.parent for record in records})
    return [f"missing audio directory: {directory}" for directory in directories if not directory.is_dir()]


def cmd_prep(config: RunConfig, track: str | None = None, dry_run: bool = False) -> int:
    """Prepare the corpus and print the filter report as JSON."""
    prep = config.prep
    if prep is None:
        return _report_problems(["config has no [prep] section"])
    problems = missing_inputs(config, "prep")
    if problems:
        return _report_problems(problems)

    records = read_manifest(prep.manifest_in)
    problems = _missing_audio_dirs(records)
    if problems:
        return _report_problems(problems)
    budgets = prep.budgets_for(track)
    if dry_run:
        _print_plan(
            "prep",
            utterances=len(records),
            manifest_out=prep.manifest_out,
            out_dir=prep.out_dir,
            budgets_hours=budgets,
            rules=prep.rules.model_dump(),
        )
        return 0

    if prep.external_scores is not None:
        records = attach_external_scores(records, read_external_scores(prep.external_scores))
    prep.manifest_out.parent.mkdir(parents=True, exist_ok=True)
    report = preprocess_corpus(
        records,
        prep.manifest_out,
        prep.out_dir,
        prep.rules,
        budgets,
        seed=config.seed,
        workers=config.workers,
        encoding=prep.encoding,
    )
    print(report.model_dump_json(indent=2))
    return 0


def cmd_simulate(config: RunConfig, dry_run: bool = False) -> int:
    """Degrade every utterance; exits 1 if any utterance failed."""
    simulate = config.simulate
    if simulate is None:
        return _report_problems(["config has no [simulate] section"])
    problems = missing_inputs(config, "simulate")
    if problems:
        return _report_problems(problems)

    records = read_manifest(simulate.manifest)
    settings = SimulationSettings(
        sampler=simulate.sampler.model_copy(update={"master_seed": config.seed}),
        noise=read_manifest(simulate.noise_manifest) if simulate.noise_manifest is not None else [],
        rirs=read_manifest(simulate.rir_manifest) if simulate.rir_manifest is not None else [],
        out_dir=simulate.out_dir,
        encoding=simulate.encoding,
    )
    if dry_run:
        _print_plan(
            "simulate",
            utterances=len(records),
            noise_resources=len(settings.noise),
            rir_resources=len(settings.rirs),
            out_dir=settings.out_dir,
            master_seed=config.seed,
        )
        return 0

    outcomes = simulate_corpus(records, settings, workers=config.workers)
    failures = [f"{outcome.utterance_id}: {outcome.error}" for outcome in outcomes if outcome.error is not None]
    return _report_problems(failures)


def cmd_evaluate(config: RunConfig, dry_run: bool = False) -> int:
    """Compute signal metrics and CAcc, merge ingested scores and write the score table."""
    evaluate = config.evaluate
    if evaluate is None:
        return _report_problems(["config has no [evaluate] section"])
    problems = missing_inputs(config, "evaluate")
    if problems:
        return _report_problems(problems)

    records = read_manifest(evaluate.manifest)
    if dry_run:
        _print_plan(
            "evaluate",
            utterances=len(records),
            systems=sorted(evaluate.systems),
            metrics=evaluate.metrics,
            ingested=sorted(evaluate.ingest),
            output=evaluate.output,
        )
        return 0

    table = ScoreTable()
    if evaluate.systems and evaluate.metrics:
        descriptors = [get_descriptor(name) for name in evaluate.metrics]
        table = evaluate_manifest(records, evaluate.systems, descriptors, workers=config.workers)
    for metric in sorted(evaluate.ingest):
        for path in evaluate.ingest[metric]:
            table = ingest_scores(path, get_descriptor(metric), table)
    if evaluate.transcripts is not None:
        references = read_transcripts(evaluate.transcripts.references, evaluate.transcripts.text_column)
        languages = {record.utterance_id: record.language for record in records}
        for system_id in sorted(evaluate.transcripts.hypotheses):
            hypotheses = read_transcripts(evaluate.transcripts.hypotheses[system_id], "hypothesis")
            score_transcripts(table, system_id, hypotheses, references, languages)

    evaluate.output.parent.mkdir(parents=True, exist_ok=True)
    write_score_table(table, evaluate.output)
    logger.info("Wrote %d score(s) to %s", len(table.entries), evaluate.output)
    return 0


def _category_config(path: Path | None, table: ScoreTable) -> CategoryConfig:
    if path is not None:
        return load_category_config(path)
    return default_category_config(table.metrics)


def cmd_rank(config: RunConfig, by_language: bool = False, dry_run: bool = False) -> int:
    """Write the leaderboard (CSV, text and figure) and, with `by_language`, per-language mean tables."""
    rank = config.rank
    if rank is None:
        return _report_problems(["config has no [rank] section"])
    problems = missing_inputs(config, "rank")
    if problems:
        return _report_problems(problems)
    if by_language and rank.manifest is None:
        return _report_problems(["--by-language needs [rank] manifest for utterance languages"])

    table = read_score_table(rank.scores, METRIC_REGISTRY)
    categories = _category_config(rank.category_config, table)
    if dry_run:
        _print_plan(
            "rank",
            systems=table.systems,
            metrics=categories.metrics,
            categories=categories.category_names,
            out_dir=rank.out_dir,
            by_language=by_language,
        )
        return 0

    board = build_leaderboard(table, categories)
    rank.out_dir.mkdir(parents=True, exist_ok=True)
    write_leaderboard_csv(board, rank.out_dir / "leaderboard.csv")
    text = render_leaderboard(board)
    (rank.out_dir / "leaderboard.txt").write_text(text, encoding="utf-8")
    print(text, end="")
    if rank.plot:
        plot_leaderboard(board, rank.out_dir / "leaderboard.png")

    if by_language and rank.manifest is not None:
        languages = {record.utterance_id: record.language for record in read_manifest(rank.manifest)}
        means_by_language = language_means(table, languages)
        for tag, means in means_by_language.items():
            write_language_means_csv(means, rank.out_dir / f"language_{tag}.csv")
        if rank.plot:
            for metric in table.metrics:
                plot_language_means(means_by_language, metric, rank.out_dir / f"language_{metric}.png")
        logger.info("Wrote per-language means for %d language(s)", len(means_by_language))
    return 0


def _manifest_problems(path: Path) -> list[str]:
    try:
        records = read_manifest(path)
    except (OSError, ValueError) as e:
        return [str(e)]
    problems = [f"{path}: {record.utterance_id}: missing audio {record.path}" for record in records if not record.path.is_file()]
    problems.extend(
        f"{path}: {record.utterance_id}: {record.assigned_rate_hz} Hz is not a challenge rate"
        for record in records
        if record.assigned_rate_hz is not None and not is_challenge_rate(record.assigned_rate_hz)
    )
    return problems


def cmd_validate(config: RunConfig) -> int:
    """List every problem of the configured inputs; prints `ok` when there is none."""
    problems: list[str] = []
    manifests: list[Path] = []
    for command in ("prep", "simulate", "evaluate", "rank"):
        if getattr(config, command) is None:
            continue
        problems.extend(f"[{command}] {problem}" for problem in missing_inputs(config, command))
    if config.prep is not None:
        manifests.append(config.prep.manifest_in)
    if config.simulate is not None:
        manifests.extend(
            path
            for path in (config.simulate.manifest, config.simulate.noise_manifest, config.simulate.rir_manifest)
            if path is not None
        )
    if config.evaluate is not None:
        manifests.append(config.evaluate.manifest)
    if config.rank is not None and config.rank.manifest is not None:
        manifests.append(config.rank.manifest)
    for path in dict.fromkeys(manifests):
        if path.exists():
            problems.extend(_manifest_problems(path))

    if config.rank is not None and config.rank.category_config is not None and config.rank.category_config.exists():
        try:
            load_category_config(config.rank.category_config)
        except ConfigurationError as e:
            problems.append(str(e))

    for problem in problems:
        print(problem)
    if not problems:
        print("ok")
    return 1 if problems else 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, required=True, help="Run configuration TOML file")
    common.add_argument("--seed", type=int, default=None, help="Override the master seed")
    common.add_argument("--workers", type=int, default=None, help="Override the worker count")
    common.add_argument("--dry-run", action="store_true", help="Print the planned actions and write nothing")
    common.add_argument("-v", "--verbose", action="store_true", help="Log debug messages")

    parser = argparse.ArgumentParser(prog="urgentkit", description="Speech enhancement challenge toolkit")
    commands = parser.add_subparsers(dest="command", required=True)
    prep = commands.add_parser("prep", parents=[common], help="Resample, filter and cap a corpus")
    prep.add_argument("--track", default=None, help="Use the budgets of this [prep.tracks] entry")
    commands.add_parser("simulate", parents=[common], help="Degrade clean speech")
    commands.add_parser("evaluate", parents=[common], help="Build the score table")
    rank = commands.add_parser("rank", parents=[common], help="Rank systems into a leaderboard")
    rank.add_argument("--by-language", action="store_true", help="Also write per-language mean tables")
    commands.add_parser("validate", parents=[common], help="Lint the config, manifests and category config")
    return parser


def _apply_overrides(config: RunConfig, args: argparse.Namespace) -> RunConfig:
    updates: dict[str, int] = {}
    if args.seed is not None:
        updates["seed"] = args.seed
    if args.workers is not None:
        updates["workers"] = args.workers
    try:
        checked = RunConfig.model_validate(updates)
    except ValidationError as e:
        raise ConfigurationError(f"invalid command-line override: {e}") from e
    return config.model_copy(update={key: getattr(checked, key) for key in updates})


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        config = _apply_overrides(load_run_config(args.config), args)
        match args.command:
            case "prep":
                return cmd_prep(config, track=args.track, dry_run=args.dry_run)
            case "simulate":
                return cmd_simulate(config, dry_run=args.dry_run)
            case "evaluate":
                return cmd_evaluate(config, dry_run=args.dry_run)
            case "rank":
                return cmd_rank(config, by_language=args.by_language, dry_run=args.dry_run)
            case "validate":
                return cmd_validate(config)
            case _:
                raise NotImplementedError(f"Command {args.command} is not supported")
    except (UrgentKitError, ValidationError, OSError, ValueError) as e:
        logger.error("%s", e)  # noqa: TRY400
        return 1


if __name__ == "__main__":
    sys.exit(main())
