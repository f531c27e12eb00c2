"""Baseline subset selectors: random, prioritized (TD error), top return and full."""

import numpy as np

from redor.agent.config import TrainConfig
from redor.agent.losses import td_targets
from redor.agent.params import AgentParams, q_values
from redor.core.redor_error import RedorError
from redor.envdata.dataset import OfflineDataset
from redor.numcore.linalg import RealVector
from redor.selector.omp import Selection

BASELINES = ("random", "prioritized", "top_return", "full")


def _top(scores: RealVector, size: int) -> list[int]:
    ranked = sorted(range(len(scores)), key=lambda i: (-scores[i], i))
    return sorted(ranked[:size])


def td_priorities(
    dataset: OfflineDataset, params: AgentParams, cfg: TrainConfig | None = None
) -> RealVector:
    """Mean squared TD error of every trajectory, with noise-free targets."""
    batch = dataset.transition_batch()
    errors = q_values(params.critic, batch.states, batch.actions) - td_targets(params, batch, cfg)
    lengths = np.array([len(t) for t in dataset.trajectories])
    sums = np.bincount(batch.trajectory_ids, weights=errors * errors, minlength=len(dataset))
    result: RealVector = sums / lengths
    return result


def baseline_select(
    dataset: OfflineDataset,
    method: str,
    size: int | None = None,
    params: AgentParams | None = None,
    seed: int = 0,
    cfg: TrainConfig | None = None,
) -> Selection:
    """Uniform-weight subset chosen by a baseline rule.

    Args:
        dataset: Dataset to reduce.
        method: One of ``random``, ``prioritized``, ``top_return``, ``full``.
        size: Subset size in ``1..N`` (ignored by ``full``).
        params: Agent whose critic ranks trajectories for ``prioritized``.
        seed: Generator seed for ``random``.
        cfg: Discount used by the ``prioritized`` TD targets.

    Raises:
        RedorError: Unknown method, size out of range, or missing params.
    """
    n = len(dataset)
    if method not in BASELINES:
        raise RedorError(f"unknown baseline '{method}'; valid: {', '.join(BASELINES)}")
    if method == "full":
        ids = list(range(n))
    else:
        if size is None or not 1 <= size <= n:
            raise RedorError(f"subset size must be in [1, {n}], got {size}")
        if method == "random":
            ids = sorted(int(i) for i in np.random.default_rng(seed).choice(n, size, replace=False))
        elif method == "prioritized":
            if params is None:
                raise RedorError("prioritized selection needs agent parameters")
            ids = _top(td_priorities(dataset, params, cfg), size)
        else:
            ids = _top(dataset.total_returns, size)
    return Selection(tuple(ids), np.ones(len(ids)))
