"""Built-in probe instances and the dispatcher used by ``redor probe``."""

from collections.abc import Callable

import numpy as np

from redor.agent.checkpoints import CheckpointStore
from redor.agent.config import TrainConfig
from redor.agent.trainer import train
from redor.analysis.config import ProbeConfig
from redor.analysis.convergence import (
    QuadraticProblem,
    convergence_bound_check,
    critic_convergence_trace,
    monotone_descent_check,
    quadratic_convergence_trace,
)
from redor.analysis.oracles import (
    cluster_bound_check,
    greedy_ratio_check,
    submodularity_ratio_probe,
)
from redor.analysis.reports import ProbeReport, measure_bound_constants
from redor.core.redor_error import UsageError
from redor.core.utils import config_section
from redor.envdata.dataset import OfflineDataset, generate_dataset
from redor.envdata.envs import make_env
from redor.selector.config import SelectorConfig
from redor.selector.gradients import GradientTable, build_gradient_table
from redor.selector.omp import Selection, omp_select
from redor.selector.redor import redor

CORESET_TOLERANCE = 1e-6
CRITIC_HIDDEN_DIM = 8
CRITIC_SUBSET_FRACTION = 0.25


def random_table(rng: np.random.Generator, candidates: int, dim: int) -> GradientTable:
    """Gaussian gradient rows whose full gradient is their mean."""
    grads = rng.normal(size=(candidates, dim))
    return GradientTable.from_columns(grads, grads.mean(axis=0))


def clustered_table(
    rng: np.random.Generator, clusters: int, per_cluster: int, dim: int, spread: float = 0.1
) -> GradientTable:
    """Rows scattered tightly around ``clusters`` well-separated centres."""
    centres = 5.0 * rng.normal(size=(clusters, dim))
    grads = np.repeat(centres, per_cluster, axis=0)
    grads = grads + spread * rng.normal(size=grads.shape)
    return GradientTable.from_columns(grads, grads.mean(axis=0))


def quadratic_coreset(problem: QuadraticProblem, size: int) -> Selection:
    """OMP coreset over the per-sample gradients at ``theta = 0``."""
    theta = np.zeros(problem.dim)
    table = GradientTable.from_columns(problem.sample_grads(theta), problem.grad(theta))
    return omp_select(table, lam=0.0, tolerance=CORESET_TOLERANCE, budget=size)


def _lam(table: GradientTable, scale: float) -> float:
    return scale * float(table.full_grad @ table.full_grad)


def pretrained_point_mass(
    seed: int, trajectories: int, cfg: ProbeConfig
) -> tuple[OfflineDataset, CheckpointStore, TrainConfig]:
    """Half-expert, half-random point-mass data and ``critic_rounds`` short TD3+BC checkpoints."""
    env = make_env("point-mass", horizon=cfg.critic_horizon).spec
    expert = trajectories // 2
    dataset = generate_dataset(
        env, [("expert", expert, 0.1), ("random", trajectories - expert, 0.0)], seed
    )
    train_cfg = TrainConfig(
        hidden_dim=CRITIC_HIDDEN_DIM,
        hidden_layers=1,
        batch_size=16,
        gradient_steps=cfg.critic_pretrain_steps,
        pretrain_steps=cfg.critic_pretrain_steps,
    )
    store = CheckpointStore()
    train(dataset, train_cfg, seed, checkpoints_out=store, checkpoint_rounds=cfg.critic_rounds)
    return dataset, store, train_cfg


def probe_submodularity(seed: int, cfg: ProbeConfig) -> ProbeReport:
    """Bootstrapped-target critic rows at the last checkpoint, with measured bound constants."""
    dataset, store, train_cfg = pretrained_point_mass(seed, cfg.candidates, cfg)
    params = store.get(cfg.critic_rounds)
    table = build_gradient_table(
        dataset, range(len(dataset)), params, cfg.critic_rounds, "td", train_cfg
    )
    lam = _lam(table, cfg.lam_scale)
    constants = measure_bound_constants(dataset, params, len(table), lam, train_cfg)
    return submodularity_ratio_probe(table, lam, cfg.pair_budget, constants, seed)


def probe_cluster(seed: int, cfg: ProbeConfig) -> ProbeReport:
    rng = np.random.default_rng(seed)
    per_cluster = max(1, -(-cfg.candidates // cfg.clusters_per_table))
    table = clustered_table(rng, cfg.clusters_per_table, per_cluster, cfg.dim)
    return cluster_bound_check(table, min(cfg.cluster_count, len(table)), seed)


def probe_greedy(seed: int, cfg: ProbeConfig) -> ProbeReport:
    table = random_table(np.random.default_rng(seed), cfg.greedy_candidates, cfg.dim)
    return greedy_ratio_check(table, cfg.subset_cap, cfg.greedy_lambda, cfg.cluster_count)


def probe_convergence(seed: int, cfg: ProbeConfig) -> ProbeReport:
    problem = QuadraticProblem.random(seed, cfg.quadratic_samples, cfg.quadratic_dim)
    coreset = quadratic_coreset(problem, cfg.coreset_size)
    trace = quadratic_convergence_trace(problem, coreset.ids, coreset.weights, cfg.steps)
    return convergence_bound_check(
        trace, f"quadratic n={problem.size} p={problem.dim}, coreset of {len(coreset)}"
    )


def probe_critic_convergence(seed: int, cfg: ProbeConfig) -> ProbeReport:
    """Critic descent on a ReDOR subset of a small point-mass dataset.

    The subset is selected from a short TD3+BC pretraining run, and descent
    starts from its last checkpoint.
    """
    dataset, store, _ = pretrained_point_mass(seed, cfg.critic_trajectories, cfg)
    select_cfg = SelectorConfig(rounds=cfg.critic_rounds, budget_fraction=CRITIC_SUBSET_FRACTION)
    reduced = redor(dataset, store, select_cfg)
    trace = critic_convergence_trace(
        dataset,
        store.get(cfg.critic_rounds),
        reduced.ids,
        reduced.weights,
        cfg.critic_steps,
        cfg.critic_lr,
    )
    return convergence_bound_check(
        trace,
        f"point-mass critic, redor subset of {len(reduced)}/{len(dataset)}",
        probe="critic-convergence",
    )


def probe_descent(seed: int, cfg: ProbeConfig) -> ProbeReport:
    problem = QuadraticProblem.random(seed, cfg.quadratic_samples, cfg.quadratic_dim)
    coreset = quadratic_coreset(problem, cfg.coreset_size)
    return monotone_descent_check(
        problem, coreset.ids, coreset.weights, schedule=cfg.schedule, steps=cfg.steps, seed=seed
    )


PROBES: dict[str, Callable[[int, ProbeConfig], ProbeReport]] = {
    "submodularity": probe_submodularity,
    "convergence": probe_convergence,
    "critic-convergence": probe_critic_convergence,
    "cluster": probe_cluster,
    "greedy": probe_greedy,
    "descent": probe_descent,
}


def run_probes(name: str, seed: int, cfg: ProbeConfig | None = None) -> list[ProbeReport]:
    """Run one named probe, or ``all`` of them, on the built-in instances for ``seed``.

    Raises:
        UsageError: Unknown probe name; the message lists the valid names.
    """
    if cfg is None:
        section = config_section("probe")
        cfg = section if section is not None else ProbeConfig()
    if name == "all":
        return [probe(seed, cfg) for probe in PROBES.values()]
    if name not in PROBES:
        raise UsageError(f"unknown probe '{name}'; valid: all, {', '.join(PROBES)}")
    return [PROBES[name](seed, cfg)]
