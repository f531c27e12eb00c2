"""Tests for gradient tables, regularized OMP, multi-round reduction and baselines."""

import json
import tempfile
import unittest
from pathlib import Path

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from redor.agent import CheckpointStore, init_agent, mc_critic_loss_grad, train
from redor.core.redor_error import (
    DatasetFormatError,
    DimensionMismatchError,
    MissingCheckpointError,
    RedorError,
)
from redor.envdata import OfflineDataset, Trajectory, make_env
from redor.numcore.mlp import MlpParams
from redor.selector import (
    GradientTable,
    ReducedDataset,
    Selection,
    SelectorConfig,
    baseline_select,
    build_gradient_table,
    merge_selections,
    omp_select,
    read_selection,
    redor,
    residual_error,
    residual_error_reg,
    td_priorities,
    top_return_filter,
    write_selection,
)
from redor.tests.conftest import CustomFormatter, gaussian_table, tiny_dataset, tiny_train_config


def dataset_with_returns(rewards: list[float]) -> OfflineDataset:
    """One single-step trajectory per reward, so total returns equal the rewards."""
    env = make_env("point-mass", horizon=1).spec
    rng = np.random.default_rng(0)
    trajectories = tuple(
        Trajectory(rng.normal(size=(2, 4)), rng.uniform(-1, 1, size=(1, 2)), np.array([r]), 0.99)
        for r in rewards
    )
    return OfflineDataset(env, 0.99, trajectories)


def zero_critic(params):
    zeros = MlpParams.zeros(params.critic.layer_sizes)
    return params.replace(critic=zeros, critic_target=zeros)


class TestResidualError(unittest.TestCase):
    def test_examples(self):
        grads = np.eye(2)
        full = np.array([2.0, 3.0])
        self.assertEqual(residual_error(np.array([2.0, 3.0]), grads, full), 0.0)
        self.assertEqual(residual_error(np.array([2.0, 0.0]), grads, full), 3.0)
        self.assertAlmostEqual(residual_error(np.zeros(2), grads, full), np.sqrt(13.0))
        self.assertEqual(residual_error(np.zeros(0), np.zeros((0, 2)), full), np.sqrt(13.0))

    def test_exact_representation(self):
        rng = np.random.default_rng(0)
        grads = rng.normal(size=(4, 6))
        weights = rng.uniform(0.1, 2.0, size=4)
        self.assertLess(residual_error(weights, grads, weights @ grads), 1e-12)

    def test_regularized(self):
        grads, full = np.eye(2), np.array([2.0, 3.0])
        w = np.array([2.0, 0.0])
        self.assertEqual(residual_error_reg(w, grads, full, 0.0), residual_error(w, grads, full))
        self.assertEqual(residual_error_reg(w, grads, full, 0.5), 5.0)
        self.assertAlmostEqual(residual_error_reg(np.zeros(2), grads, full, 7.0), np.sqrt(13.0))
        with self.assertRaises(RedorError):
            residual_error_reg(w, grads, full, -1.0)

    def test_dimension_mismatch(self):
        with self.assertRaises(DimensionMismatchError):
            residual_error(np.ones(2), np.ones((2, 3)), np.ones(2))


class TestTopReturnFilter(unittest.TestCase):
    def test_examples(self):
        self.assertEqual(top_return_filter(dataset_with_returns([0.1, 0.2, 0.3, 0.4]), 50), [2, 3])
        self.assertEqual(top_return_filter(dataset_with_returns([0.5, 0.5, 0.1]), 50), [0, 1])
        self.assertEqual(top_return_filter(dataset_with_returns([0.3, 0.1, 0.2]), 100), [0, 1, 2])

    def test_ties_go_to_lower_id(self):
        self.assertEqual(top_return_filter(dataset_with_returns([0.2, 0.5, 0.5, 0.5]), 50), [1, 2])

    def test_percent_range(self):
        dataset = dataset_with_returns([0.1, 0.2])
        for m in (0.0, 100.5):
            with self.assertRaises(RedorError):
                top_return_filter(dataset, m)


class TestGradientTable(unittest.TestCase):
    def setUp(self):
        self.dataset = tiny_dataset(seed=5, horizon=5)
        self.params = init_agent(self.dataset.env, np.random.default_rng(1), 8, 1)

    def test_full_gradient_matches_per_transition_recomputation(self):
        table = build_gradient_table(self.dataset, [0, 2], self.params)
        batch = self.dataset.transition_batch()
        per_step = [
            mc_critic_loss_grad(self.params, batch.take(np.array([i]))).grad
            for i in range(len(batch))
        ]
        expected = np.sum(per_step, axis=0) / len(batch)
        np.testing.assert_allclose(table.full_grad, expected, rtol=1e-8, atol=1e-12)
        np.testing.assert_allclose(table.recomputed_full_grad(), expected, rtol=1e-8, atol=1e-12)

    def test_trajectory_row_is_mean_of_steps(self):
        table = build_gradient_table(self.dataset, [3], self.params)
        steps = self.dataset.transition_batch([3])
        per_step = [
            mc_critic_loss_grad(self.params, steps.take(np.array([i]))).grad
            for i in range(len(steps))
        ]
        np.testing.assert_allclose(table.candidate_grads[0], np.mean(per_step, axis=0), atol=1e-12)
        np.testing.assert_array_equal(table.rows_for([3])[0], table.all_grads[3])

    def test_candidates_sorted_and_validated(self):
        table = build_gradient_table(self.dataset, [4, 1, 4], self.params, round_index=3)
        self.assertEqual(table.candidate_ids, (1, 4))
        self.assertEqual(table.round_index, 3)
        self.assertEqual(table.all_grads.shape, (len(self.dataset), self.params.critic.size))
        with self.assertRaises(RedorError):
            build_gradient_table(self.dataset, [], self.params)
        with self.assertRaises(RedorError):
            table.rows_for([0])

    def test_dimension_mismatch(self):
        other = init_agent(make_env("double-integrator").spec, np.random.default_rng(0), 8, 1)
        with self.assertRaises(DimensionMismatchError):
            build_gradient_table(self.dataset, [0], other)

    def test_td_target_mode(self):
        mc = build_gradient_table(self.dataset, [0], self.params, target_mode="mc")
        td = build_gradient_table(
            self.dataset, [0], self.params, target_mode="td", cfg=tiny_train_config()
        )
        self.assertEqual(mc.full_grad.shape, td.full_grad.shape)
        self.assertFalse(np.allclose(mc.full_grad, td.full_grad))

    def test_from_columns_orders_ids(self):
        table = GradientTable.from_columns(np.array([[1.0, 0.0], [0.0, 1.0]]), [1, 1], ids=[7, 2])
        self.assertEqual(table.candidate_ids, (2, 7))
        np.testing.assert_array_equal(table.rows_for([7]), [[1.0, 0.0]])


class TestOmpSelect(unittest.TestCase):
    def test_single_exact_candidate(self):
        table = GradientTable.from_columns(np.array([[1.0, 2.0]]), [1.0, 2.0])
        selection = omp_select(table, lam=0.0, tolerance=0.01, budget=5)
        self.assertEqual(selection.ids, (0,))
        np.testing.assert_allclose(selection.weights, [1.0])
        self.assertEqual(len(selection.residual_history), 1)
        self.assertAlmostEqual(selection.final_residual, 0.0)

    def test_picks_the_correlated_column(self):
        table = GradientTable.from_columns(np.eye(2), [0.0, 3.0])
        selection = omp_select(table, lam=0.0, tolerance=0.01, budget=2)
        self.assertEqual(selection.ids, (1,))
        np.testing.assert_allclose(selection.weights, [3.0])
        self.assertAlmostEqual(selection.final_residual, 0.0)

    def test_two_orthogonal_columns(self):
        table = GradientTable.from_columns(np.eye(2), [2.0, 3.0])
        selection = omp_select(table, lam=0.0, tolerance=1e-9, budget=2)
        self.assertEqual(selection.ids, (0, 1))
        np.testing.assert_allclose(selection.weights, [2.0, 3.0])
        self.assertEqual(len(selection.residual_history), 2)

    def test_budget_and_zero_gradient(self):
        table = gaussian_table(0, candidates=10, dim=12)
        self.assertLessEqual(len(omp_select(table, lam=1e-3, tolerance=1e-12, budget=3)), 3)
        zero = GradientTable.from_columns(np.eye(3), np.zeros(3))
        empty = omp_select(zero, lam=0.0, tolerance=0.01, budget=3)
        self.assertEqual(len(empty), 0)
        self.assertIsNone(empty.final_residual)

    def test_negative_correlation_is_never_kept(self):
        table = GradientTable.from_columns(np.array([[-1.0, 0.0], [0.0, 1.0]]), [1.0, 1.0])
        selection = omp_select(table, lam=0.0, tolerance=1e-9, budget=2)
        self.assertEqual(selection.ids, (1,))
        self.assertTrue(np.all(selection.weights > 0))

    def test_config_defaults(self):
        table = GradientTable.from_columns(np.eye(2), [2.0, 3.0])
        cfg = SelectorConfig(ridge_lambda=0.0, tolerance=1e-9, budget=1)
        self.assertEqual(omp_select(table, cfg).ids, (1,))

    @settings(max_examples=200, deadline=None)
    @given(
        seed=st.integers(min_value=0, max_value=2**32 - 1),
        candidates=st.integers(min_value=1, max_value=20),
        dim=st.integers(min_value=1, max_value=32),
        lam=st.sampled_from([0.0, 1e-4, 1e-1, 10.0]),
    )
    def test_history_never_increases(self, seed, candidates, dim, lam):
        table = gaussian_table(seed, candidates, dim)
        selection = omp_select(table, lam=lam, tolerance=1e-6, budget=candidates)
        history = selection.residual_history
        self.assertTrue(all(b <= a for a, b in zip(history, history[1:])))
        self.assertTrue(np.all(selection.weights > 0.0))
        if history:
            rows = table.rows_for(selection.ids)
            expected = residual_error_reg(selection.weights, rows, table.full_grad, lam)
            self.assertAlmostEqual(history[-1], expected, places=9)
            self.assertLessEqual(history[-1], np.linalg.norm(table.full_grad) + 1e-12)

    def test_residual_orthogonal_to_selection_without_ridge(self):
        for seed in range(50):
            table = gaussian_table(seed, candidates=8, dim=20)
            selection = omp_select(table, lam=0.0, tolerance=1e-9, budget=8)
            rows = table.rows_for(selection.ids)
            residual = table.full_grad - selection.weights @ rows
            scale = np.linalg.norm(table.full_grad) * np.linalg.norm(rows, axis=1)
            self.assertTrue(np.all(np.abs(rows @ residual) <= 1e-8 * scale))


class TestSelection(unittest.TestCase):
    def test_invariants(self):
        with self.assertRaises(RedorError):
            Selection((0, 1), np.array([1.0]))
        with self.assertRaises(RedorError):
            Selection((0, 0), np.array([1.0, 1.0]))
        with self.assertRaises(RedorError):
            Selection((0,), np.array([-1.0]))
        with self.assertRaises(RedorError):
            Selection((0,), np.array([1.0]), residual_history=(1.0, 2.0))

    def test_merge_averages_over_rounds(self):
        first = Selection((0,), np.array([2.0]), round_index=1)
        second = Selection((0, 1), np.array([4.0, 1.0]), round_index=2)
        ids, weights = merge_selections([first, second])
        self.assertEqual(ids, (0, 1))
        np.testing.assert_allclose(weights, [3.0, 1.0])


class TestRedor(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.dataset = tiny_dataset(seed=6, expert=4, random=4, horizon=6)
        cls.store = CheckpointStore()
        train(
            cls.dataset, tiny_train_config(), seed=0, checkpoints_out=cls.store, checkpoint_rounds=3
        )
        cls.cfg = SelectorConfig(rounds=3, top_percent=50, tolerance=0.01, budget=3)

    def test_single_round_equals_omp(self):
        cfg = self.cfg.model_copy(update={"rounds": 1})
        reduced = redor(self.dataset, self.store, cfg)
        candidates = top_return_filter(self.dataset, 50)
        table = build_gradient_table(self.dataset, candidates, self.store.get(1), 1)
        expected = omp_select(table, cfg, budget=3)
        self.assertEqual(reduced.rounds, (expected,))
        self.assertEqual(reduced.ids, expected.ids)
        np.testing.assert_array_equal(reduced.weights, expected.weights)

    def test_union_of_rounds_with_mean_weights(self):
        formatter = CustomFormatter()
        reduced = redor(self.dataset, self.store, self.cfg, formatter)
        self.assertEqual(len(reduced.rounds), 3)
        self.assertEqual(len(formatter.status_messages), 3)
        ids, weights = merge_selections(reduced.rounds)
        self.assertEqual(reduced.ids, ids)
        np.testing.assert_array_equal(reduced.weights, weights)
        candidates = set(top_return_filter(self.dataset, 50))
        self.assertTrue(set(reduced.ids) <= candidates)
        self.assertEqual(reduced.config["rounds"], 3)
        self.assertEqual(redor(self.dataset, self.store, self.cfg), reduced)

    def test_identical_checkpoints_are_idempotent(self):
        params = self.store.get(2)
        same = CheckpointStore()
        for t in (1, 2, 3):
            same.put(t, 10, params)
        reduced = redor(self.dataset, same, self.cfg)
        self.assertEqual(reduced.ids, reduced.rounds[0].ids)
        self.assertTrue(all(r.ids == reduced.ids for r in reduced.rounds))

    def test_missing_round(self):
        partial = CheckpointStore()
        partial.put(1, 5, self.store.get(1))
        with self.assertRaises(MissingCheckpointError):
            redor(self.dataset, partial, self.cfg)


class TestBaselines(unittest.TestCase):
    def setUp(self):
        self.dataset = tiny_dataset(seed=8, expert=3, random=5, horizon=5)
        self.params = init_agent(self.dataset.env, np.random.default_rng(0), 8, 1)

    def test_full_and_random(self):
        n = len(self.dataset)
        full = baseline_select(self.dataset, "full")
        self.assertEqual(full.ids, tuple(range(n)))
        np.testing.assert_array_equal(full.weights, np.ones(n))
        self.assertEqual(baseline_select(self.dataset, "random", n, seed=3).ids, tuple(range(n)))
        a = baseline_select(self.dataset, "random", 3, seed=3)
        self.assertEqual(a, baseline_select(self.dataset, "random", 3, seed=3))
        self.assertEqual(len(a), 3)
        self.assertEqual(list(a.ids), sorted(a.ids))

    def test_prioritized_with_zero_critic_ranks_by_squared_rewards(self):
        params = zero_critic(self.params)
        scores = [float(np.mean(t.rewards**2)) for t in self.dataset.trajectories]
        np.testing.assert_allclose(td_priorities(self.dataset, params), scores)
        ranked = sorted(range(len(scores)), key=lambda i: (-scores[i], i))
        selection = baseline_select(self.dataset, "prioritized", 3, params)
        self.assertEqual(selection.ids, tuple(sorted(ranked[:3])))

    def test_top_return_matches_filter(self):
        selection = baseline_select(self.dataset, "top_return", 4)
        self.assertEqual(list(selection.ids), top_return_filter(self.dataset, 50))

    def test_errors(self):
        with self.assertRaises(RedorError):
            baseline_select(self.dataset, "random", 0)
        with self.assertRaises(RedorError):
            baseline_select(self.dataset, "random", len(self.dataset) + 1)
        with self.assertRaises(RedorError):
            baseline_select(self.dataset, "prioritized", 2)
        with self.assertRaises(RedorError):
            baseline_select(self.dataset, "loudest", 2)


class TestSelectionFile(unittest.TestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.path = Path(self.tmp.name) / "selection.jsonl"
        rounds = (
            Selection((0, 2), np.array([1.5, 0.5]), (3.0, 1.0), 1),
            Selection((2,), np.array([2.5]), (2.0,), 2),
        )
        ids, weights = merge_selections(rounds)
        self.reduced = ReducedDataset("redor", ids, weights, rounds, 5, {"rounds": 2}, 12.5)

    def tearDown(self):
        self.tmp.cleanup()

    def test_round_trip(self):
        loaded = read_selection(write_selection(self.reduced, self.path))
        self.assertEqual(loaded, self.reduced)
        self.assertEqual(loaded.wall_time_ms, 12.5)
        self.assertEqual(loaded.ids, (0, 2))
        np.testing.assert_array_equal(loaded.weights, [1.5, 1.5])

    def _rewrite(self, line_index, change):
        lines = write_selection(self.reduced, self.path).read_text().splitlines()
        record = json.loads(lines[line_index])
        change(record)
        lines[line_index] = json.dumps(record)
        self.path.write_text("\n".join(lines) + "\n")

    def test_increasing_history_is_rejected_with_line(self):
        self._rewrite(1, lambda r: r.update(residual_history=[1.0, 3.0]))
        with self.assertRaises(DatasetFormatError) as ctx:
            read_selection(self.path)
        self.assertEqual(ctx.exception.line_number, 2)

    def test_negative_weight_is_rejected(self):
        self._rewrite(3, lambda r: r.update(weight=-1.0))
        with self.assertRaises(DatasetFormatError):
            read_selection(self.path)

    def test_non_numeric_weight_reports_its_line(self):
        self._rewrite(4, lambda r: r.update(weight="heavy"))
        with self.assertRaises(DatasetFormatError) as ctx:
            read_selection(self.path)
        self.assertEqual(ctx.exception.line_number, 5)

    def test_non_integer_header_count(self):
        self._rewrite(0, lambda r: r.update(subset_size="two"))
        with self.assertRaises(DatasetFormatError) as ctx:
            read_selection(self.path)
        self.assertEqual(ctx.exception.line_number, 1)

    def test_out_of_range_id(self):
        with self.assertRaises(RedorError):
            ReducedDataset.from_selection("random", Selection((9,), np.ones(1)), 5)


if __name__ == "__main__":
    unittest.main()
