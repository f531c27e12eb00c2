"""End-to-end tests of the ``redor`` subcommands through ``main``."""

import json
import tempfile
import unittest
from pathlib import Path

import numpy as np
import pytest

from redor.agent import evaluate, read_checkpoint_store, train
from redor.analysis import read_metrics, read_probe_reports, summarize
from redor.core import config as config_module
from redor.core.config_builder import build_config
from redor.envdata import read_dataset
from redor.scripts import cli
from redor.scripts.cli import (
    DATASET_FILE,
    EXIT_FAILURE,
    EXIT_OK,
    EXIT_USAGE,
    METRICS_FILE,
    PROBES_FILE,
    main,
    selection_filename,
)
from redor.selector import ReducedDataset, baseline_select, read_selection
from redor.tests.conftest import CustomFormatter

TINY = [
    "--train.hidden_dim", "8",
    "--train.hidden_layers", "1",
    "--train.batch_size", "16",
    "--train.pretrain_steps", "12",
    "--train.gradient_steps", "10",
    "--train.eval_every", "10",
    "--env.eval_episodes", "2",
    "--select.rounds", "3",
    "--select.budget", "2",
    "--no-compare.record_wall_time",
]  # fmt: skip


class CliTestCase(unittest.TestCase):
    """Temporary output directory, with the global config restored afterwards."""

    def setUp(self):
        self.original_config = config_module.DEFAULT_CONFIG
        self.tmp = tempfile.TemporaryDirectory()
        self.out = Path(self.tmp.name)

    def tearDown(self):
        config_module.DEFAULT_CONFIG = self.original_config
        self.tmp.cleanup()

    def subdir(self, name: str) -> Path:
        path = self.out / name
        path.mkdir()
        return path

    def generate(self, out: Path | None = None, *extra: str) -> Path:
        out = out or self.out
        code = main(
            ["generate", "--out", str(out), "--env.horizon", "6", "--expert", "3",
             "--random", "3", *extra]
        )  # fmt: skip
        self.assertEqual(code, EXIT_OK)
        return out / DATASET_FILE

    def run_cli(self, command: str, *argv: str) -> int:
        return main([command, "--out", str(self.out), *TINY, *argv])


class TestExitCodes(CliTestCase):
    def test_usage_errors_exit_one(self):
        self.assertEqual(main([]), EXIT_USAGE)
        self.assertEqual(main(["generate", "--bogus"]), EXIT_USAGE)
        self.assertEqual(main(["explode"]), EXIT_USAGE)
        self.assertEqual(main(["select", "--out", str(self.out)]), EXIT_USAGE)
        self.assertEqual(self.run_cli("generate", "--train.batch_size", "0"), EXIT_USAGE)
        self.assertEqual(self.run_cli("generate", "--env", "tatooine"), EXIT_USAGE)
        self.assertEqual(self.run_cli("pretrain"), EXIT_USAGE)
        self.assertEqual(
            self.run_cli("pretrain", "--dataset", str(self.out / "nothing.jsonl")), EXIT_USAGE
        )

    def test_missing_output_directory(self):
        missing = self.out / "missing"
        self.assertEqual(main(["generate", "--out", str(missing)]), EXIT_USAGE)
        self.assertFalse(missing.exists())

    def test_runtime_errors_exit_two(self):
        broken = self.out / "broken.jsonl"
        broken.write_text("not json\n")
        self.assertEqual(self.run_cli("pretrain", "--dataset", str(broken)), EXIT_FAILURE)
        dataset = self.generate()
        self.assertEqual(
            self.run_cli("select", "--dataset", str(dataset), "--method", "redor"), EXIT_FAILURE
        )

    def test_malformed_number_exits_two(self):
        dataset = self.generate()
        lines = dataset.read_text().splitlines()
        lines[0] = json.dumps(json.loads(lines[0]) | {"trajectory_count": "two"})
        dataset.write_text("\n".join(lines) + "\n")
        self.assertEqual(self.run_cli("pretrain", "--dataset", str(dataset)), EXIT_FAILURE)

    def test_config_is_installed(self):
        self.assertEqual(self.run_cli("probe", "--name", "greedy"), EXIT_OK)
        self.assertEqual(config_module.DEFAULT_CONFIG.train.hidden_dim, 8)
        self.assertFalse(config_module.DEFAULT_CONFIG.compare.record_wall_time)


class TestGenerate(CliTestCase):
    def test_deterministic_files(self):
        first = self.generate(self.subdir("a"), "--seed", "1")
        second = self.generate(self.subdir("b"), "--seed", "1")
        self.assertEqual(first.read_bytes(), second.read_bytes())
        dataset = read_dataset(first)
        self.assertEqual(len(dataset), 6)
        self.assertEqual(dataset.env.horizon, 6)
        self.assertEqual(dataset.provenance.seed, 1)

    def test_hard_triples_random_trajectories(self):
        dataset = read_dataset(self.generate(self.out, "--hard"))
        self.assertEqual(len(dataset), 3 + 9)

    def test_yaml_config(self):
        config_file = self.out / "redor.yaml"
        config_file.write_text("env:\n  name: double-integrator\n  expert: 2\n  random: 1\n")
        code = main(["generate", "--out", str(self.out), "--config", str(config_file)])
        self.assertEqual(code, EXIT_OK)
        dataset = read_dataset(self.out / DATASET_FILE)
        self.assertEqual(dataset.env.name, "double-integrator")
        self.assertEqual(len(dataset), 3)


class TestPretrainAndSelect(CliTestCase):
    def setUp(self):
        super().setUp()
        self.dataset_path = self.generate()

    def pretrain(self, *extra: str) -> int:
        return self.run_cli("pretrain", "--dataset", str(self.dataset_path), *extra)

    def select(self, method: str, *extra: str) -> ReducedDataset:
        code = self.run_cli(
            "select", "--dataset", str(self.dataset_path), "--method", method, *extra
        )
        self.assertEqual(code, EXIT_OK)
        return read_selection(self.out / selection_filename(method))

    def test_pretrain_writes_one_file_per_round(self):
        self.assertEqual(self.pretrain(), EXIT_OK)
        files = sorted(self.out.glob("checkpoint_*.jsonl"))
        self.assertEqual(len(files), 3)
        before = [f.read_bytes() for f in files]
        self.assertEqual(self.pretrain(), EXIT_OK)
        self.assertEqual([f.read_bytes() for f in files], before)

    def test_single_round_is_the_final_step(self):
        self.assertEqual(self.pretrain("--select.rounds", "1"), EXIT_OK)
        store = read_checkpoint_store(self.out)
        self.assertEqual(store.rounds, [1])
        self.assertEqual(store.step_of(1), 12)

    def test_baselines(self):
        full = self.select("full")
        self.assertEqual(full.ids, tuple(range(6)))
        random = self.select("random", "--size", "2", "--seed", "4")
        self.assertEqual(len(random), 2)
        self.assertEqual(random.config, {"seed": 4})
        self.assertEqual(random.wall_time_ms, 0.0)

    def test_redor_selection(self):
        self.assertEqual(self.pretrain(), EXIT_OK)
        reduced = self.select("redor")
        self.assertEqual(reduced.method, "redor")
        self.assertEqual(len(reduced.rounds), 3)
        self.assertTrue(all(len(r) <= 2 for r in reduced.rounds))
        self.assertTrue(set(reduced.ids) <= {0, 1, 2, 3, 4, 5})
        self.assertEqual(reduced.config["budget"], 2)

    def test_prioritized_needs_checkpoints(self):
        code = self.run_cli(
            "select", "--dataset", str(self.dataset_path), "--method", "prioritized"
        )
        self.assertEqual(code, EXIT_FAILURE)
        self.assertEqual(self.pretrain(), EXIT_OK)
        self.assertEqual(len(self.select("prioritized", "--size", "3")), 3)


class TestTrainEval(CliTestCase):
    def setUp(self):
        super().setUp()
        self.dataset_path = self.generate()
        code = self.run_cli("select", "--dataset", str(self.dataset_path), "--method", "full")
        self.assertEqual(code, EXIT_OK)
        self.selection = self.out / selection_filename("full")

    def train_eval(self, *extra: str) -> int:
        return self.run_cli(
            "train-eval",
            "--dataset",
            str(self.dataset_path),
            "--selection",
            str(self.selection),
            *extra,
        )

    def test_one_row_per_seed_when_evaluating_once(self):
        self.assertEqual(self.train_eval("--seed", "0", "--seed", "1"), EXIT_OK)
        rows = read_metrics(self.out / METRICS_FILE)
        keys = [(r.method, r.seed, r.step) for r in rows]
        self.assertEqual(keys, [("full", 0, 10), ("full", 1, 10)])
        self.assertTrue(all(r.subset_fraction == 1.0 for r in rows))
        self.assertEqual(self.train_eval("--seed", "2"), EXIT_OK)
        self.assertEqual(len(read_metrics(self.out / METRICS_FILE)), 3)

    def test_full_selection_matches_direct_training(self):
        self.assertEqual(self.train_eval("--seed", "0"), EXIT_OK)
        row = read_metrics(self.out / METRICS_FILE)[0]
        config = config_module.DEFAULT_CONFIG
        dataset = read_dataset(self.dataset_path)
        params, _ = train(dataset, config.train, 0)
        stats = evaluate(params, dataset.env, config.env.eval_episodes, 0)
        self.assertEqual(row.mean_return, stats.mean)
        self.assertEqual(row.std_return, stats.std)

    def test_selection_from_another_dataset(self):
        other = self.generate(self.subdir("other"), "--random", "5")
        code = self.run_cli(
            "train-eval", "--dataset", str(other), "--selection", str(self.selection)
        )
        self.assertEqual(code, EXIT_FAILURE)


class TestCompare(CliTestCase):
    def setUp(self):
        super().setUp()
        self.dataset_path = self.generate()

    def compare_args(self, out: Path, *methods: str) -> list[str]:
        argv = ["compare", "--out", str(out), "--dataset", str(self.dataset_path)]
        for method in methods:
            argv += ["--method", method]
        return argv + ["--seed", "0", "--seed", "1", *TINY]

    def test_single_method_summary(self):
        argv = self.compare_args(self.out, "full")
        args = cli.build_parser().parse_args(argv)
        config = build_config(args.config, cli._overrides(args))
        formatter = CustomFormatter()
        self.assertEqual(cli.cmd_compare(args, config, formatter), EXIT_OK)

        title, _, table = formatter.tables[0]
        self.assertEqual(title, "final evaluation return")
        self.assertEqual(len(table), 1)
        rows = read_metrics(self.out / METRICS_FILE)
        self.assertEqual(len(rows), 2)
        finals = [r.mean_return for r in rows]
        self.assertEqual(table[0][0], "full")
        self.assertEqual(table[0][1], 2)
        self.assertAlmostEqual(table[0][2], float(np.mean(finals)), places=12)
        summary = summarize(rows)[0]
        self.assertEqual(table[0][2:], [
            summary.mean_final_return,
            summary.std_final_return,
            summary.mean_subset_size,
            summary.mean_wall_time_ms,
        ])  # fmt: skip

    def test_rerun_is_identical(self):
        first, second = self.subdir("a"), self.subdir("b")
        self.assertEqual(main(self.compare_args(first, "random", "full")), EXIT_OK)
        self.assertEqual(main(self.compare_args(second, "random", "full")), EXIT_OK)
        self.assertEqual(
            (first / METRICS_FILE).read_bytes(), (second / METRICS_FILE).read_bytes()
        )

    def test_baselines_match_the_redor_size(self):
        self.assertEqual(main(self.compare_args(self.out, "redor", "random")), EXIT_OK)
        rows = read_metrics(self.out / METRICS_FILE)
        self.assertEqual([r.method for r in rows], ["redor", "random", "redor", "random"])
        for seed in (0, 1):
            sizes = {r.method: r.subset_size for r in rows if r.seed == seed}
            self.assertEqual(sizes["random"], sizes["redor"])

    def test_default_fraction_without_redor(self):
        dataset = read_dataset(self.dataset_path)
        config = build_config(overrides={"compare__default_fraction": 0.5}, install=False)
        reduced = cli.select_subset(dataset, "random", 3, config)
        self.assertEqual(len(reduced), 3)
        self.assertEqual(reduced.ids, baseline_select(dataset, "random", 3, seed=3).ids)


class TestBoundChecks(CliTestCase):
    def test_every_bound_holds(self):
        self.assertEqual(self.run_cli("probe", "--name", "all"), EXIT_OK)
        reports = read_probe_reports(self.out / PROBES_FILE)
        self.assertEqual(len(reports), 6)
        self.assertTrue(all(r.passed for r in reports))

    def test_seeds_and_determinism(self):
        first, second = self.subdir("a"), self.subdir("b")
        for out in (first, second):
            argv = ["probe", "--out", str(out), "--name", "greedy", "--seed", "0", "--seed", "1"]
            code = main(argv)
            self.assertEqual(code, EXIT_OK)
        self.assertEqual(len(read_probe_reports(first / PROBES_FILE)), 2)
        self.assertEqual(
            (first / PROBES_FILE).read_bytes(), (second / PROBES_FILE).read_bytes()
        )

    def test_unknown_name(self):
        self.assertEqual(self.run_cli("probe", "--name", "everything"), EXIT_USAGE)
        self.assertFalse((self.out / PROBES_FILE).exists())


@pytest.mark.slow
class TestEndToEnd(CliTestCase):
    def test_generate_pretrain_select_compare(self):
        tiny = [arg for arg in TINY if arg != "--no-compare.record_wall_time"]
        code = main(
            ["generate", "--out", str(self.out), "--env.horizon", "20", "--expert", "10",
             "--random", "10", "--seed", "3"]
        )  # fmt: skip
        self.assertEqual(code, EXIT_OK)
        dataset = str(self.out / DATASET_FILE)
        self.assertEqual(
            main(["pretrain", "--out", str(self.out), "--dataset", dataset, *tiny]), EXIT_OK
        )
        for method in ("redor", "prioritized", "random", "full"):
            argv = ["select", "--out", str(self.out), "--dataset", dataset, "--method", method]
            self.assertEqual(main(argv + tiny), EXIT_OK)
            self.assertGreaterEqual(
                read_selection(self.out / selection_filename(method)).wall_time_ms, 0.0
            )
        code = main(["compare", "--out", str(self.out), "--dataset", dataset, *tiny])
        self.assertEqual(code, EXIT_OK)
        rows = read_metrics(self.out / METRICS_FILE)
        methods = [s.method for s in summarize(rows)]
        self.assertEqual(methods, ["redor", "random", "prioritized", "full"])
        self.assertTrue(all(r.step == 10 for r in rows))

    @pytest.mark.timeout(1800)
    def test_hard_dataset_ordering(self):
        """50 expert + 150 random trajectories, T = 10, 20% budget, five seeds."""
        code = main(
            ["generate", "--out", str(self.out), "--hard", "--expert", "50", "--random", "50",
             "--seed", "0"]
        )  # fmt: skip
        self.assertEqual(code, EXIT_OK)
        self.assertEqual(len(read_dataset(self.out / DATASET_FILE)), 200)
        argv = ["compare", "--out", str(self.out), "--dataset", str(self.out / DATASET_FILE)]
        for method in ("redor", "random", "prioritized", "full"):
            argv += ["--method", method]
        for seed in range(5):
            argv += ["--seed", str(seed)]
        argv += ["--select.rounds", "10", "--select.top_percent", "50",
                 "--select.budget_fraction", "0.2"]  # fmt: skip
        self.assertEqual(main(argv), EXIT_OK)

        rows = read_metrics(self.out / METRICS_FILE)
        summaries = {s.method: s for s in summarize(rows)}
        self.assertEqual({s.runs for s in summaries.values()}, {5})
        redor_return = summaries["redor"].mean_final_return
        self.assertGreaterEqual(redor_return, summaries["random"].mean_final_return)
        self.assertGreaterEqual(redor_return, 0.9 * summaries["full"].mean_final_return)

        redor_times = [r.selection_wall_time_ms for r in rows if r.method == "redor"]
        self.assertTrue(all(0.0 < ms < 60_000.0 for ms in redor_times))


if __name__ == "__main__":
    unittest.main()
