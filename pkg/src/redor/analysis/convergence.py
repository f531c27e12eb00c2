"""Convergence-bound and monotone-descent checks for training on a weighted subset."""

import math
from collections.abc import Sequence
from dataclasses import dataclass
from typing import Literal

import numpy as np
from scipy.linalg import eigvalsh, lstsq

from redor.agent.losses import mc_critic_loss_grad
from redor.agent.params import AgentParams
from redor.analysis.reports import ProbeReport
from redor.core.redor_error import DimensionMismatchError, RedorError
from redor.envdata.dataset import OfflineDataset
from redor.numcore.linalg import RealMatrix, RealVector
from redor.numcore.mlp import MlpParams
from redor.selector.gradients import build_gradient_table

Schedule = Literal["constant", "bound", "decay"]
SCHEDULES: tuple[Schedule, ...] = ("constant", "bound", "decay")
DESCENT_SLACK = 1e-12


@dataclass(frozen=True, eq=False)
class ConvergenceTrace:
    """Iterates ``theta_1..theta_G`` of descent on a subset loss.

    ``losses``, ``grad_norms`` and ``approx_errors`` are the full-dataset loss,
    full-gradient norm and gradient-matching error at each iterate;
    ``theta_star`` is the reference optimum (exact or a best-loss proxy).
    """

    losses: tuple[float, ...]
    params: RealMatrix
    grad_norms: tuple[float, ...]
    approx_errors: tuple[float, ...]
    theta_star: RealVector
    theta_star_loss: float
    exact_optimum: bool = False


def convergence_bound_check(
    trace: ConvergenceTrace, instance: str = "", probe: str = "convergence"
) -> ProbeReport:
    """``min_t L(theta_t) <= L* + D sigma / sqrt(G) + (D / G) sum_t eps_t``.

    ``D`` is the largest distance from an iterate to ``theta_star`` and
    ``sigma`` the largest full-gradient norm. Both right-hand terms are
    recorded separately.

    Raises:
        RedorError: Empty trace or fields of different lengths.
    """
    steps = len(trace.losses)
    if steps == 0:
        raise RedorError("the convergence trace has no iterates")
    params = np.atleast_2d(trace.params)
    if not (len(trace.grad_norms) == len(trace.approx_errors) == params.shape[0] == steps):
        raise RedorError("convergence trace fields must have one entry per iterate")
    if params.shape[1] != len(trace.theta_star):
        raise DimensionMismatchError("theta_star does not match the iterate dimension")
    radius = float(np.max(np.linalg.norm(params - trace.theta_star, axis=1)))
    sigma = float(np.max(trace.grad_norms))
    sqrt_term = radius * sigma / math.sqrt(steps)
    error_term = radius / steps * float(np.sum(trace.approx_errors))
    return ProbeReport(
        probe=probe,
        instance=instance or f"{steps} steps",
        measured={
            "min_loss": float(np.min(trace.losses)),
            "optimal_loss": trace.theta_star_loss,
            "radius": radius,
            "sigma": sigma,
            "sqrt_term": sqrt_term,
            "error_term": error_term,
        },
        subject="min_loss",
        relation="<=",
        bound=trace.theta_star_loss + sqrt_term + error_term,
        tolerance=1e-9,
        note="" if trace.exact_optimum else "theta_star is the best iterate of a full-data run",
    )


def _critic_state(
    dataset: OfflineDataset, agent: AgentParams, flat: RealVector
) -> tuple[float, RealVector, RealMatrix]:
    params = agent.replace(critic=MlpParams.unflatten(agent.critic.layer_sizes, flat))
    loss = mc_critic_loss_grad(params, dataset.transition_batch()).loss
    table = build_gradient_table(dataset, range(len(dataset)), params)
    return loss, table.full_grad, table.all_grads


def critic_convergence_trace(
    dataset: OfflineDataset,
    agent: AgentParams,
    ids: Sequence[int],
    weights: Sequence[float] | np.ndarray,
    steps: int,
    lr: float,
    reference_steps: int | None = None,
) -> ConvergenceTrace:
    """Gradient descent of the return-target critic on ``sum_i w_i L_i``.

    The reference optimum is the lowest-loss iterate of a ``reference_steps``
    (default ``steps``) descent on the full-dataset loss from the same start.
    """
    ids = dataset.check_ids(ids)
    w = np.asarray(weights, dtype=np.float64)
    if w.shape != (len(ids),):
        raise DimensionMismatchError(f"{w.size} weights for {len(ids)} trajectories")
    if steps < 1 or lr <= 0.0:
        raise RedorError("steps must be >= 1 and lr positive")

    theta = agent.critic.flatten()
    losses, snapshots, grad_norms, errors = [], [], [], []
    for _ in range(steps):
        loss, full_grad, all_grads = _critic_state(dataset, agent, theta)
        subset_grad = w @ all_grads[ids]
        losses.append(loss)
        snapshots.append(theta)
        grad_norms.append(float(np.linalg.norm(full_grad)))
        errors.append(float(np.linalg.norm(subset_grad - full_grad)))
        theta = theta - lr * subset_grad

    best_theta, best_loss = snapshots[int(np.argmin(losses))], float(np.min(losses))
    theta = agent.critic.flatten()
    for _ in range(reference_steps if reference_steps is not None else steps):
        loss, full_grad, _ = _critic_state(dataset, agent, theta)
        if loss < best_loss:
            best_theta, best_loss = theta, loss
        theta = theta - lr * full_grad
    return ConvergenceTrace(
        losses=tuple(losses),
        params=np.array(snapshots),
        grad_norms=tuple(grad_norms),
        approx_errors=tuple(errors),
        theta_star=best_theta,
        theta_star_loss=best_loss,
    )


@dataclass(frozen=True, eq=False)
class QuadraticProblem:
    """Least-squares regression ``L(theta) = mean_i (x_i . theta - y_i)^2``."""

    features: RealMatrix
    targets: RealVector

    def __post_init__(self) -> None:
        if self.features.ndim != 2 or self.targets.shape != (self.features.shape[0],):
            raise DimensionMismatchError("features must be (n, p) with one target per row")

    @classmethod
    def random(
        cls, seed: int, samples: int = 40, dim: int = 5, noise: float = 0.1
    ) -> "QuadraticProblem":
        rng = np.random.default_rng(seed)
        features = rng.normal(size=(samples, dim))
        targets = features @ rng.normal(size=dim) + noise * rng.normal(size=samples)
        return cls(features, targets)

    @property
    def size(self) -> int:
        return int(self.features.shape[0])

    @property
    def dim(self) -> int:
        return int(self.features.shape[1])

    @property
    def lipschitz(self) -> float:
        """Largest eigenvalue of the Hessian ``(2 / n) X^T X``."""
        hessian = 2.0 / self.size * self.features.T @ self.features
        return float(eigvalsh(hessian)[-1])

    def loss(self, theta: RealVector) -> float:
        residual = self.features @ theta - self.targets
        return float(residual @ residual / self.size)

    def grad(self, theta: RealVector) -> RealVector:
        residual = self.features @ theta - self.targets
        result: RealVector = 2.0 / self.size * self.features.T @ residual
        return result

    def sample_grads(self, theta: RealVector) -> RealMatrix:
        """Row ``i`` is the gradient of ``(x_i . theta - y_i)^2``."""
        return 2.0 * self.features * (self.features @ theta - self.targets)[:, None]

    def subset_grad(
        self, theta: RealVector, ids: Sequence[int], weights: Sequence[float] | np.ndarray
    ) -> RealVector:
        rows = self.sample_grads(theta)[list(ids)]
        result: RealVector = np.asarray(weights, dtype=np.float64) @ rows
        return result

    def solution(self) -> RealVector:
        result: RealVector = lstsq(self.features, self.targets)[0]
        return result


def quadratic_convergence_trace(
    problem: QuadraticProblem,
    ids: Sequence[int],
    weights: Sequence[float] | np.ndarray,
    steps: int,
    lr: float | None = None,
    theta0: RealVector | None = None,
) -> ConvergenceTrace:
    """Descent on the weighted subset loss of a quadratic toy; ``theta_star`` is exact."""
    lr = lr if lr is not None else 1.0 / problem.lipschitz
    theta = np.zeros(problem.dim) if theta0 is None else np.asarray(theta0, dtype=np.float64)
    losses, snapshots, grad_norms, errors = [], [], [], []
    for _ in range(steps):
        full_grad = problem.grad(theta)
        subset_grad = problem.subset_grad(theta, ids, weights)
        losses.append(problem.loss(theta))
        snapshots.append(theta)
        grad_norms.append(float(np.linalg.norm(full_grad)))
        errors.append(float(np.linalg.norm(subset_grad - full_grad)))
        theta = theta - lr * subset_grad
    optimum = problem.solution()
    return ConvergenceTrace(
        losses=tuple(losses),
        params=np.array(snapshots),
        grad_norms=tuple(grad_norms),
        approx_errors=tuple(errors),
        theta_star=optimum,
        theta_star_loss=problem.loss(optimum),
        exact_optimum=True,
    )


def monotone_descent_check(
    problem: QuadraticProblem,
    ids: Sequence[int],
    weights: Sequence[float] | np.ndarray,
    lr: float | None = None,
    schedule: Schedule = "constant",
    steps: int = 50,
    seed: int = 0,
) -> ProbeReport:
    """Count steps that raise the full loss although the descent conditions hold.

    A step is checked only when ``<grad L, grad L_sub> >= 0`` and the step size
    is at most ``(2 / L) <grad L, grad L_sub> / ||grad L_sub||^2``. Schedules:
    ``constant`` uses ``lr`` (default ``1 / L``), ``bound`` uses exactly the
    admissible maximum, ``decay`` uses ``lr / (1 + t)``.
    """
    if schedule not in SCHEDULES:
        raise RedorError(f"unknown schedule '{schedule}'; valid: {', '.join(SCHEDULES)}")
    lipschitz = problem.lipschitz
    base = lr if lr is not None else 1.0 / lipschitz
    theta = np.random.default_rng(seed).normal(size=problem.dim)
    violations = checked = excluded = 0
    for t in range(steps):
        full_grad = problem.grad(theta)
        subset_grad = problem.subset_grad(theta, ids, weights)
        inner = float(full_grad @ subset_grad)
        norm_sq = float(subset_grad @ subset_grad)
        admissible = 2.0 / lipschitz * inner / norm_sq if norm_sq > 0.0 else 0.0
        if schedule == "bound":
            step = admissible if inner >= 0.0 and norm_sq > 0.0 else base
        elif schedule == "decay":
            step = base / (1.0 + t)
        else:
            step = base
        new_theta = theta - step * subset_grad
        if inner >= 0.0 and norm_sq > 0.0 and step <= admissible * (1.0 + DESCENT_SLACK):
            checked += 1
            before = problem.loss(theta)
            if problem.loss(new_theta) > before + DESCENT_SLACK * max(1.0, before):
                violations += 1
        else:
            excluded += 1
        theta = new_theta
    return ProbeReport(
        probe="descent",
        instance=f"quadratic n={problem.size} p={problem.dim}, |S|={len(ids)}, {schedule} steps",
        measured={
            "violations": violations,
            "checked_steps": checked,
            "excluded_steps": excluded,
            "lipschitz": lipschitz,
        },
        subject="violations",
        relation="<=",
        bound=0.0,
        tolerance=0.0,
    )
