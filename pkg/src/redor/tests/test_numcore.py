"""Tests for the hand-written MLP and the ridge solvers."""

import unittest

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from redor.core.redor_error import DimensionMismatchError, RedorError, SingularSystemError
from redor.numcore.linalg import nonnegative_ridge, ridge_objective, ridge_solve
from redor.numcore.mlp import (
    MlpParams,
    forward_trace,
    init_mlp,
    mlp_backward,
    mlp_forward,
    mlp_layer_sizes,
    per_sample_grad_norms,
)


def relative_error(a: np.ndarray, b: np.ndarray) -> float:
    scale = max(np.linalg.norm(a), np.linalg.norm(b), 1e-8)
    return float(np.linalg.norm(a - b) / scale)


def numeric_param_grad(params, x, output_grad, eps=1e-6):
    flat = params.flatten()
    sizes = params.layer_sizes
    grad = np.zeros_like(flat)
    for i in range(flat.size):
        bumped = flat.copy()
        bumped[i] += eps
        up = output_grad @ mlp_forward(MlpParams.unflatten(sizes, bumped), x).ravel()
        bumped[i] -= 2 * eps
        down = output_grad @ mlp_forward(MlpParams.unflatten(sizes, bumped), x).ravel()
        grad[i] = (up - down) / (2 * eps)
    return grad


class TestMlpForward(unittest.TestCase):
    def test_zero_network_outputs_zero(self):
        params = MlpParams.zeros(mlp_layer_sizes(3, 2, hidden_dim=4))
        np.testing.assert_array_equal(mlp_forward(params, np.array([1.0, -2.0, 3.0])), [0, 0])

    def test_identity_chain(self):
        ones = (np.ones((1, 1)),) * 3
        params = MlpParams(ones, (np.zeros(1),) * 3)
        np.testing.assert_allclose(mlp_forward(params, np.array([2.5])), [2.5])

    def test_hand_evaluated_2_2_2_1_net(self):
        params = MlpParams(
            (
                np.array([[1.0, -1.0], [2.0, 0.5]]),
                np.array([[1.0, 0.0], [0.0, -2.0]]),
                np.array([[0.5], [3.0]]),
            ),
            (np.array([0.0, 0.5]), np.array([-1.0, 0.0]), np.array([1.0])),
        )
        # hidden 1: relu([5, 0.5]); hidden 2: relu([4, -1]) = [4, 0]; output 4*0.5 + 1
        np.testing.assert_allclose(mlp_forward(params, np.array([1.0, 2.0])), [3.0])

    def test_batch_rows_match_single_inputs(self):
        params = init_mlp(mlp_layer_sizes(4, 2, hidden_dim=8), np.random.default_rng(0))
        batch = np.random.default_rng(1).normal(size=(5, 4))
        out = mlp_forward(params, batch)
        self.assertEqual(out.shape, (5, 2))
        for row, expected in zip(batch, out):
            np.testing.assert_allclose(mlp_forward(params, row), expected)

    def test_dimension_mismatch(self):
        params = init_mlp(mlp_layer_sizes(4, 1, hidden_dim=8), np.random.default_rng(0))
        with self.assertRaises(DimensionMismatchError):
            mlp_forward(params, np.zeros(3))
        with self.assertRaises(DimensionMismatchError):
            mlp_backward(params, np.zeros(4), np.zeros(2))

    def test_default_widths(self):
        self.assertEqual(mlp_layer_sizes(6, 1), (6, 256, 256, 1))

    def test_flat_layout_is_weights_then_biases(self):
        params = init_mlp((2, 3, 1), np.random.default_rng(2))
        flat = params.flatten()
        self.assertEqual(flat.size, params.size)
        np.testing.assert_array_equal(flat[:6], params.weights[0].ravel())
        np.testing.assert_array_equal(flat[6:9], params.biases[0])
        self.assertTrue(MlpParams.unflatten(params.layer_sizes, flat).bit_equal(params))

    def test_params_are_read_only(self):
        params = init_mlp((2, 3, 1), np.random.default_rng(2))
        with self.assertRaises(ValueError):
            params.weights[0][0, 0] = 1.0


class TestMlpBackward(unittest.TestCase):
    def test_zero_output_grad(self):
        params = init_mlp((3, 5, 2), np.random.default_rng(0))
        param_grad, input_grad = mlp_backward(params, np.ones(3), np.zeros(2))
        self.assertFalse(param_grad.any())
        self.assertFalse(input_grad.any())

    def test_scalar_chain_rule(self):
        params = MlpParams((np.array([[2.0]]),), (np.array([0.0]),))
        param_grad, input_grad = mlp_backward(params, np.array([3.0]), np.array([1.0]))
        np.testing.assert_allclose(param_grad, [3.0, 1.0])
        np.testing.assert_allclose(input_grad, [2.0])

    def test_matches_finite_differences(self):
        for seed in range(20):
            rng = np.random.default_rng(seed)
            params = init_mlp((3, 6, 6, 2), rng)
            x = rng.normal(size=3)
            output_grad = rng.normal(size=2)
            param_grad, input_grad = mlp_backward(params, x, output_grad)
            self.assertLess(
                relative_error(param_grad, numeric_param_grad(params, x, output_grad)), 1e-4
            )
            numeric_input = np.array(
                [
                    (
                        output_grad @ mlp_forward(params, x + 1e-6 * e)
                        - output_grad @ mlp_forward(params, x - 1e-6 * e)
                    )
                    / 2e-6
                    for e in np.eye(3)
                ]
            )
            self.assertLess(relative_error(input_grad, numeric_input), 1e-4)

    def test_batch_gradient_is_sum_of_rows(self):
        rng = np.random.default_rng(3)
        params = init_mlp((4, 8, 1), rng)
        batch = rng.normal(size=(6, 4))
        output_grad = rng.normal(size=(6, 1))
        total, _ = mlp_backward(params, batch, output_grad)
        rows = sum(mlp_backward(params, x, g)[0] for x, g in zip(batch, output_grad))
        np.testing.assert_allclose(total, rows, atol=1e-12)

    def test_per_sample_norms(self):
        rng = np.random.default_rng(4)
        params = init_mlp((4, 8, 8, 1), rng)
        batch = rng.normal(size=(5, 4))
        output_grad = rng.normal(size=(5, 1))
        norms = per_sample_grad_norms(params, forward_trace(params, batch), output_grad)
        expected = [
            np.linalg.norm(mlp_backward(params, x, g)[0]) for x, g in zip(batch, output_grad)
        ]
        np.testing.assert_allclose(norms, expected, rtol=1e-10)


class TestRidgeSolve(unittest.TestCase):
    def test_single_column(self):
        a = np.array([[3.0], [4.0]])
        np.testing.assert_allclose(ridge_solve(a, np.array([3.0, 4.0]), 0.0), [1.0])
        np.testing.assert_allclose(ridge_solve(a, np.array([3.0, 4.0]), 25.0), [0.5])

    def test_orthogonal_columns(self):
        np.testing.assert_allclose(ridge_solve(np.eye(2), np.array([2.0, 3.0]), 0.0), [2.0, 3.0])

    def test_empty_support(self):
        self.assertEqual(ridge_solve(np.zeros((3, 0)), np.ones(3), 0.0).shape, (0,))

    def test_singular_without_ridge(self):
        columns = np.array([[1.0, 2.0], [1.0, 2.0]])
        with self.assertRaises(SingularSystemError):
            ridge_solve(columns, np.array([1.0, 1.0]), 0.0)
        w = ridge_solve(columns, np.array([1.0, 1.0]), 1e-3)
        self.assertTrue(np.all(np.isfinite(w)))

    def test_invalid_inputs(self):
        with self.assertRaises(DimensionMismatchError):
            ridge_solve(np.eye(2), np.ones(3), 0.0)
        with self.assertRaises(RedorError):
            ridge_solve(np.eye(2), np.ones(2), -1.0)

    @settings(max_examples=50, deadline=None)
    @given(
        seed=st.integers(min_value=0, max_value=2**32 - 1),
        dim=st.integers(min_value=1, max_value=12),
        k=st.integers(min_value=1, max_value=6),
        lam=st.floats(min_value=1e-6, max_value=1e3),
    )
    def test_normal_equations_hold(self, seed, dim, k, lam):
        rng = np.random.default_rng(seed)
        columns = rng.normal(size=(dim, k))
        target = rng.normal(size=dim)
        w = ridge_solve(columns, target, lam)
        lhs = (columns.T @ columns + lam * np.eye(k)) @ w
        np.testing.assert_allclose(lhs, columns.T @ target, rtol=1e-6, atol=1e-8)
        # the solution minimises the objective against small perturbations
        base = ridge_objective(columns, w, target, lam)
        for direction in np.eye(k):
            self.assertLessEqual(base, ridge_objective(columns, w + 1e-4 * direction, target, lam))


class TestNonnegativeRidge(unittest.TestCase):
    def test_negative_weight_is_clamped(self):
        np.testing.assert_allclose(nonnegative_ridge(np.eye(2), np.array([2.0, -3.0]), 0.0), [2, 0])

    def test_all_negative_gives_zero(self):
        w = nonnegative_ridge(np.eye(2), np.array([-1.0, -1.0]), 0.5)
        np.testing.assert_array_equal(w, [0.0, 0.0])

    def test_objective(self):
        columns = np.array([[3.0], [4.0]])
        # residual (0.5*3-3, 0.5*4-4) has squared norm 6.25, plus 25 * 0.25
        self.assertAlmostEqual(
            ridge_objective(columns, np.array([0.5]), np.array([3.0, 4.0]), 25.0), 12.5
        )

    @settings(max_examples=50, deadline=None)
    @given(seed=st.integers(min_value=0, max_value=2**32 - 1))
    def test_weights_are_nonnegative(self, seed):
        rng = np.random.default_rng(seed)
        columns = rng.normal(size=(8, 4))
        w = nonnegative_ridge(columns, rng.normal(size=8), 1e-2)
        self.assertTrue(np.all(w >= 0.0))


if __name__ == "__main__":
    unittest.main()
