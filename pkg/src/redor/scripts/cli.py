"""The ``redor`` command line: generate, pretrain, select, train-eval, compare and probe.

Every subcommand reads the same configuration (defaults, then ``--config FILE``,
then ``--section.field`` flags and the short aliases below) and writes its
outputs into ``--out DIR``, which must already exist.

Exit codes: 0 on success, 1 for usage or configuration errors, 2 for runtime
failures (including a failed probe).
"""

import argparse
import dataclasses
import math
import sys
import time
from collections.abc import Sequence
from pathlib import Path
from typing import Any, NoReturn

from redor.agent.checkpoints import (
    CHECKPOINT_GLOB,
    CheckpointStore,
    read_checkpoint_store,
    write_checkpoint_store,
)
from redor.agent.trainer import TrainingLog, evaluate, train
from redor.analysis.metrics import MetricsRow, export_metrics, summarize
from redor.analysis.reports import ProbeReport, write_probe_reports
from redor.analysis.suite import run_probes
from redor.core import config as config_module
from redor.core.config_builder import build_config, config_argument_parser
from redor.core.formatter import Formatter
from redor.core.redor_error import MissingCheckpointError, RedorError, UsageError
from redor.core.simple_formatter import SimpleFormatter
from redor.envdata.dataset import OfflineDataset, generate_dataset
from redor.envdata.envs import make_env
from redor.envdata.io import read_dataset, write_dataset
from redor.multiprocessing.multiprocess import run_functions_in_parallel
from redor.scripts.config import METHODS
from redor.selector.baselines import baseline_select
from redor.selector.io import read_selection, write_selection
from redor.selector.redor import ReducedDataset, redor

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_FAILURE = 2

DATASET_FILE = "dataset.jsonl"
METRICS_FILE = "metrics.csv"
PROBES_FILE = "probes.jsonl"

# Short flags and the config fields they set.
ALIASES = {
    "env_name": "env__name",
    "expert": "env__expert",
    "medium": "env__medium",
    "random": "env__random",
    "hard": "env__hard",
    "out": "compare__out_dir",
    "seeds": "compare__seeds",
    "methods": "compare__methods",
}


class RedorArgumentParser(argparse.ArgumentParser):
    """Argument parser that reports bad usage as `UsageError` instead of exiting."""

    def error(self, message: str) -> NoReturn:
        raise UsageError(message)


def selection_filename(method: str) -> str:
    return f"selection_{method}.jsonl"


def build_parser() -> RedorArgumentParser:
    common = RedorArgumentParser(add_help=False, allow_abbrev=False)
    common.add_argument("--config", default=None, help="YAML file with config sections")
    common.add_argument(
        "--seed",
        type=int,
        action="append",
        dest="seeds",
        default=None,
        help="Seed; repeat for several (default: compare.seeds)",
    )
    common.add_argument("--out", default=None, help="Output directory (default: compare.out_dir)")
    common.add_argument("--dataset", default=None, help="Dataset file")
    common.add_argument(
        "--checkpoints", default=None, help="Checkpoint directory (default: the output directory)"
    )
    common.add_argument("--size", type=int, default=None, help="Subset size for baselines")
    common.add_argument(
        "--hard", action="store_true", default=None, help="Triple the random trajectories"
    )
    config_argument_parser(common)

    parser = RedorArgumentParser(
        prog="redor",
        description="Offline RL dataset reduction by multi-round gradient matching",
        allow_abbrev=False,
    )
    commands = parser.add_subparsers(dest="command", required=True)

    generate = commands.add_parser(
        "generate", parents=[common], allow_abbrev=False, help="Roll out a toy dataset"
    )
    generate.add_argument("--env", dest="env_name", default=None, help="Environment name")
    for policy in ("expert", "medium", "random"):
        generate.add_argument(
            f"--{policy}", type=int, default=None, help=f"Number of {policy} trajectories"
        )

    commands.add_parser(
        "pretrain", parents=[common], allow_abbrev=False, help="Train and store T checkpoints"
    )

    select = commands.add_parser(
        "select", parents=[common], allow_abbrev=False, help="Select a weighted subset"
    )
    select.add_argument("--method", required=True, choices=METHODS, help="Selection method")

    train_eval = commands.add_parser(
        "train-eval",
        parents=[common],
        allow_abbrev=False,
        help="Train on a selection and append evaluation rows",
    )
    train_eval.add_argument("--selection", default=None, help="Selection file")

    compare = commands.add_parser(
        "compare", parents=[common], allow_abbrev=False, help="Compare selection methods"
    )
    compare.add_argument(
        "--method",
        dest="methods",
        action="append",
        choices=METHODS,
        default=None,
        help="Method to compare; repeat for several (default: compare.methods)",
    )

    probe = commands.add_parser(
        "probe", parents=[common], allow_abbrev=False, help="Check the selection guarantees"
    )
    probe.add_argument("--name", default="all", help="Probe name, or 'all'")
    return parser


def _overrides(args: argparse.Namespace) -> dict[str, Any]:
    flat = dict(vars(args))
    for alias, key in ALIASES.items():
        if flat.get(alias) is not None:
            flat[key] = flat[alias]
    return flat


def install_config(data: dict[str, Any]) -> Any:
    """Validate a dumped config and make it the global one (used inside workers)."""
    config = type(config_module.DEFAULT_CONFIG).model_validate(data)
    config_module.DEFAULT_CONFIG = config
    return config


def _out_dir(config: Any) -> Path:
    out = Path(config.compare.out_dir)
    if not out.is_dir():
        raise UsageError(f"output directory does not exist: {out}")
    return out


def _existing_file(path: str | None, flag: str) -> Path:
    if path is None:
        raise UsageError(f"{flag} is required")
    resolved = Path(path)
    if not resolved.is_file():
        raise UsageError(f"{flag} file not found: {resolved}")
    return resolved


def _checkpoint_dir(args: argparse.Namespace, config: Any) -> Path:
    return Path(args.checkpoints) if args.checkpoints else _out_dir(config)


def default_subset_size(config: Any, trajectory_count: int) -> int:
    return max(1, math.ceil(round(config.compare.default_fraction * trajectory_count, 9)))


def make_dataset(config: Any, seed: int) -> OfflineDataset:
    env_cfg = config.env
    env = make_env(env_cfg.name, env_cfg.horizon, env_cfg.r_max)
    return generate_dataset(env.spec, env_cfg.policy_mix(), seed, env_cfg.gamma)


def pretrain(
    dataset: OfflineDataset, seed: int, config: Any, formatter: Formatter | None = None
) -> CheckpointStore:
    """Train on the full dataset and keep ``select.rounds`` evenly spaced snapshots."""
    store = CheckpointStore()
    train(
        dataset,
        config.train,
        seed,
        gradient_steps=config.train.pretrain_steps,
        checkpoints_out=store,
        checkpoint_rounds=config.select.rounds,
        formatter=formatter,
    )
    return store


def select_subset(
    dataset: OfflineDataset,
    method: str,
    seed: int,
    config: Any,
    checkpoints: CheckpointStore | None = None,
    size: int | None = None,
    formatter: Formatter | None = None,
) -> ReducedDataset:
    """Run one selection method and stamp its wall time.

    Baselines other than ``full`` take ``size`` trajectories, by default
    ``compare.default_fraction`` of the dataset; ``prioritized`` ranks with the
    last checkpoint.
    """
    start = time.perf_counter()
    if method == "redor":
        if checkpoints is None:
            raise MissingCheckpointError("method redor needs pretrained checkpoints")
        reduced = redor(dataset, checkpoints, config.select, formatter)
    else:
        params = None
        if method == "prioritized":
            if checkpoints is None or not len(checkpoints):
                raise MissingCheckpointError("method prioritized needs pretrained checkpoints")
            params = checkpoints.get(checkpoints.rounds[-1])
        if size is None:
            size = default_subset_size(config, len(dataset))
        selection = baseline_select(dataset, method, size, params, seed, config.train)
        echo = {"seed": seed} if method == "random" else {}
        reduced = ReducedDataset.from_selection(method, selection, len(dataset), echo)
    elapsed = (time.perf_counter() - start) * 1000.0 if config.compare.record_wall_time else 0.0
    return dataclasses.replace(reduced, wall_time_ms=elapsed)


def evaluation_rows(
    dataset: OfflineDataset, reduced: ReducedDataset, seed: int, config_data: dict[str, Any]
) -> list[MetricsRow]:
    """Train on ``reduced`` with ``seed`` and evaluate every ``train.eval_every`` steps."""
    config = install_config(config_data)
    rows: list[MetricsRow] = []

    def record(step: int, params: Any, log: TrainingLog) -> None:
        stats = evaluate(params, dataset.env, config.env.eval_episodes, seed)
        log.evaluations.append((step, stats.mean, stats.std))
        rows.append(
            MetricsRow(
                method=reduced.method,
                seed=seed,
                step=step,
                mean_return=stats.mean,
                std_return=stats.std,
                subset_size=len(reduced),
                subset_fraction=reduced.fraction,
                selection_wall_time_ms=reduced.wall_time_ms,
            )
        )

    train(
        dataset,
        config.train,
        seed,
        ids=reduced.ids,
        weights=reduced.weights,
        callback=record,
        callback_every=config.train.eval_every,
    )
    return rows


def compare_seed(
    dataset_path: str | None, seed: int, size: int | None, config_data: dict[str, Any]
) -> list[MetricsRow]:
    """Every configured method for one seed: pretrain, select, then train and evaluate.

    ReDOR is selected first so that the size-matched baselines can copy its
    subset size when ``size`` is not given.
    """
    config = install_config(config_data)
    dataset = read_dataset(dataset_path) if dataset_path else make_dataset(config, seed)
    methods = list(dict.fromkeys(config.compare.methods))
    store = pretrain(dataset, seed, config) if {"redor", "prioritized"} & set(methods) else None

    reduced: dict[str, ReducedDataset] = {}
    if "redor" in methods:
        reduced["redor"] = select_subset(dataset, "redor", seed, config, store)
        if size is None:
            size = len(reduced["redor"])
    for method in methods:
        if method not in reduced:
            reduced[method] = select_subset(dataset, method, seed, config, store, size)
    rows: list[MetricsRow] = []
    for method in methods:
        rows.extend(evaluation_rows(dataset, reduced[method], seed, config_data))
    return rows


def cmd_generate(args: argparse.Namespace, config: Any, formatter: Formatter) -> int:
    out = _out_dir(config)
    dataset = make_dataset(config, config.compare.seeds[0])
    path = write_dataset(dataset, out / DATASET_FILE)
    formatter.print_status(
        f"wrote {len(dataset)} trajectories ({dataset.transition_count} transitions) to {path}"
    )
    return EXIT_OK


def cmd_pretrain(args: argparse.Namespace, config: Any, formatter: Formatter) -> int:
    dataset = read_dataset(_existing_file(args.dataset, "--dataset"))
    directory = _checkpoint_dir(args, config)
    if not directory.is_dir():
        raise UsageError(f"checkpoint directory does not exist: {directory}")
    store = pretrain(dataset, config.compare.seeds[0], config, formatter)
    for stale in directory.glob(CHECKPOINT_GLOB):
        stale.unlink()
    paths = write_checkpoint_store(store, directory)
    formatter.print_status(f"wrote {len(paths)} checkpoints to {directory}")
    return EXIT_OK


def cmd_select(args: argparse.Namespace, config: Any, formatter: Formatter) -> int:
    dataset = read_dataset(_existing_file(args.dataset, "--dataset"))
    out = _out_dir(config)
    seed = args.seeds[0] if args.seeds else config.select.seed
    checkpoints = None
    if args.method in ("redor", "prioritized"):
        checkpoints = read_checkpoint_store(_checkpoint_dir(args, config))
    reduced = select_subset(dataset, args.method, seed, config, checkpoints, args.size, formatter)
    path = write_selection(reduced, out / selection_filename(args.method))

    formatter.print_status(
        f"{args.method}: {len(reduced)} of {reduced.dataset_size} trajectories "
        f"({100.0 * reduced.fraction:.1f}%) in {reduced.wall_time_ms:.0f} ms, written to {path}"
    )
    formatter.print_table(
        f"{args.method} rounds",
        ("round", "size", "final residual"),
        [
            (s.round_index, len(s), "-" if s.final_residual is None else s.final_residual)
            for s in reduced.rounds
        ],
    )
    return EXIT_OK


def cmd_train_eval(args: argparse.Namespace, config: Any, formatter: Formatter) -> int:
    dataset = read_dataset(_existing_file(args.dataset, "--dataset"))
    reduced = read_selection(_existing_file(args.selection, "--selection"))
    out = _out_dir(config)
    if reduced.dataset_size != len(dataset):
        raise RedorError(
            f"selection was made on {reduced.dataset_size} trajectories, "
            f"the dataset has {len(dataset)}"
        )
    data = config.model_dump(mode="json")
    seeds = config.compare.seeds
    results = run_functions_in_parallel(
        [(evaluation_rows, [dataset, reduced, seed, data]) for seed in seeds]
    )
    rows = [row for seed_rows in results for row in seed_rows]
    path = export_metrics(rows, out / METRICS_FILE, append=True)
    formatter.print_status(f"appended {len(rows)} rows for {len(seeds)} seed(s) to {path}")
    return EXIT_OK


def cmd_compare(args: argparse.Namespace, config: Any, formatter: Formatter) -> int:
    out = _out_dir(config)
    dataset_path = str(_existing_file(args.dataset, "--dataset")) if args.dataset else None
    data = config.model_dump(mode="json")
    seeds = config.compare.seeds
    formatter.print_status(
        f"comparing {', '.join(config.compare.methods)} over {len(seeds)} seed(s)"
    )
    results = run_functions_in_parallel(
        [(compare_seed, [dataset_path, seed, args.size, data]) for seed in seeds]
    )
    rows = [row for seed_rows in results for row in seed_rows]
    path = export_metrics(rows, out / METRICS_FILE)
    formatter.print_table(
        "final evaluation return",
        ("method", "runs", "mean", "std", "mean size", "selection ms"),
        [
            (
                s.method,
                s.runs,
                s.mean_final_return,
                s.std_final_return,
                s.mean_subset_size,
                s.mean_wall_time_ms,
            )
            for s in summarize(rows)
        ],
    )
    formatter.print_status(f"metrics written to {path}")
    return EXIT_OK


def _report_row(report: ProbeReport) -> tuple[object, ...]:
    return (
        report.probe,
        report.instance,
        report.measured[report.subject],
        report.relation,
        report.bound,
        "pass" if report.passed else "FAIL",
    )


def cmd_probe(args: argparse.Namespace, config: Any, formatter: Formatter) -> int:
    out = _out_dir(config)
    reports: list[ProbeReport] = []
    for seed in config.compare.seeds:
        reports.extend(run_probes(args.name, seed, config.probe))
    path = write_probe_reports(reports, out / PROBES_FILE)
    formatter.print_table(
        "probes",
        ("probe", "instance", "measured", "relation", "bound", "result"),
        [_report_row(r) for r in reports],
    )
    failed = [f"{r.probe}/{r.instance}" for r in reports if not r.passed]
    if failed:
        formatter.print_error(f"{len(failed)} probe(s) failed: {', '.join(failed)}")
        return EXIT_FAILURE
    formatter.print_status(f"{len(reports)} probe report(s) written to {path}")
    return EXIT_OK


COMMANDS = {
    "generate": cmd_generate,
    "pretrain": cmd_pretrain,
    "select": cmd_select,
    "train-eval": cmd_train_eval,
    "compare": cmd_compare,
    "probe": cmd_probe,
}


def main(argv: Sequence[str] | None = None) -> int:
    """Parse ``argv``, run the subcommand and return its exit code."""
    formatter = SimpleFormatter()
    try:
        args = build_parser().parse_args(argv)
        config = build_config(args.config, _overrides(args))
        formatter = SimpleFormatter()
        return COMMANDS[args.command](args, config, formatter)
    except UsageError as e:
        formatter.print_error(str(e))
        return EXIT_USAGE
    except (RedorError, OSError) as e:
        formatter.print_error(str(e))
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
