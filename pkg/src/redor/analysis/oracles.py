"""Exhaustive and combinatorial checks of the greedy selector on small dictionaries."""

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy.cluster.vq import kmeans2
from scipy.linalg import lstsq

from redor.analysis.reports import BoundConstants, ProbeReport
from redor.core.redor_error import ProbeGuardError, SingularSystemError
from redor.numcore.linalg import RealMatrix, RealVector, nonnegative_ridge, ridge_solve
from redor.selector.gradients import GradientTable
from redor.selector.omp import omp_select, residual_error_reg

BRUTE_FORCE_MAX_CANDIDATES = 14
BRUTE_FORCE_MAX_K = 4
SUBMODULARITY_MAX_CANDIDATES = 10
GAIN_FLOOR = 1e-12
RATIO_FLOOR = 1e-12
KMEANS_ITERATIONS = 20
GREEDY_TOLERANCE = 1e-12
SQUARED_GAIN_NOTE = (
    "F(S) = ||g||^2 - min_w (||G_S w - g||^2 + lam ||w||^2), the squared ridge gain"
)


@dataclass(frozen=True, eq=False)
class Optimum:
    ids: tuple[int, ...]
    weights: RealVector
    err: float


def brute_force_optimum(table: GradientTable, k: int, lam: float) -> Optimum:
    """Best subset of at most ``k`` candidates under ``Err_lambda``.

    Every subset is scored with its nonnegative ridge weights or the zero
    vector, whichever is lower; ties go to the lexicographically smallest id
    tuple.

    Raises:
        ProbeGuardError: More than 14 candidates, or ``k`` outside ``1..4``.
    """
    if len(table) > BRUTE_FORCE_MAX_CANDIDATES or not 1 <= k <= BRUTE_FORCE_MAX_K:
        raise ProbeGuardError(
            f"brute force handles <= {BRUTE_FORCE_MAX_CANDIDATES} candidates and "
            f"1 <= k <= {BRUTE_FORCE_MAX_K}; got {len(table)} candidates, k={k}"
        )
    grads, target = table.candidate_grads, table.full_grad
    zero_err = float(np.linalg.norm(target))
    best: Optimum | None = None
    for size in range(1, min(k, len(table)) + 1):
        for subset in itertools.combinations(range(len(table)), size):
            rows = grads[list(subset)]
            ids = tuple(table.candidate_ids[j] for j in subset)
            weights, err = np.zeros(size), zero_err
            try:
                solved = nonnegative_ridge(rows.T, target, lam)
            except SingularSystemError:
                solved = None
            if solved is not None:
                solved_err = residual_error_reg(solved, rows, target, lam)
                if solved_err < err:
                    weights, err = solved, solved_err
            if best is None or err < best.err or (err == best.err and ids < best.ids):
                best = Optimum(ids, weights, err)
    assert best is not None
    return best


def _gain(columns: RealMatrix, target: RealVector, lam: float) -> float:
    """``||g||^2 - min_w (||G w - g||^2 + lam ||w||^2)``, evaluated as ``w . G^T g``."""
    if columns.shape[1] == 0:
        return 0.0
    if lam > 0.0:
        weights = ridge_solve(columns, target, lam)
    else:
        weights = lstsq(columns, target)[0]
    return float(weights @ (columns.T @ target))


def _nested_pairs(
    count: int, max_size: int, budget: int | None, rng: np.random.Generator
) -> list[tuple[frozenset[int], frozenset[int]]]:
    # Each element is outside T (0), in S (1) or in T \ S (2).
    total = 3**count
    if budget is None or budget >= total:
        labelings = itertools.product((0, 1, 2), repeat=count)
    else:
        labelings = (tuple(rng.integers(0, 3, size=count)) for _ in range(budget))
    pairs = []
    for labels in labelings:
        small = frozenset(i for i, v in enumerate(labels) if v == 1)
        big = small | frozenset(i for i, v in enumerate(labels) if v == 2)
        if len(big) > len(small) and len(big) <= max_size:
            pairs.append((small, big))
    return pairs


def submodularity_ratio_probe(
    table: GradientTable,
    lam: float,
    budget: int | None = None,
    constants: BoundConstants | None = None,
    seed: int = 0,
) -> ProbeReport:
    """Empirical submodularity ratio of the ridge gain against its guaranteed lower bound.

    The ratio is ``min sum_{j in T\\S} F(j|S) / F(T|S)`` over nested pairs
    ``S < T`` with a positive joint gain (1 if none has one), capped at 1 since
    single-element extensions have ratio exactly 1. Pairs are enumerated, or
    ``budget`` of them sampled.

    Without ``constants``, ``U_TD * U_gradQ`` is half the largest row norm, the
    least value measured constants can take since each row is a mean of
    ``2 * residual * grad Q`` terms, and ``N`` is the candidate count.

    Raises:
        ProbeGuardError: More than 10 candidates.
    """
    if len(table) > SUBMODULARITY_MAX_CANDIDATES:
        raise ProbeGuardError(
            f"submodularity probe handles <= {SUBMODULARITY_MAX_CANDIDATES} candidates, "
            f"got {len(table)}"
        )
    rng = np.random.default_rng(seed)
    grads, target = table.candidate_grads, table.full_grad
    if constants is None:
        half_norm = float(np.max(np.linalg.norm(grads, axis=1))) / 2.0
        constants = BoundConstants(half_norm, 1.0, 0.0, 0.0, 0.0, 0.0, len(table), lam)
    bound = constants.submodularity_bound()

    cache: dict[frozenset[int], float] = {}

    def gain(subset: frozenset[int]) -> float:
        if subset not in cache:
            cache[subset] = _gain(grads[sorted(subset)].T, target, lam)
        return cache[subset]

    ratio, evaluated, skipped = 1.0, 0, 0
    for small, big in _nested_pairs(len(table), constants.n_cap, budget, rng):
        joint = gain(big) - gain(small)
        if joint <= GAIN_FLOOR:
            skipped += 1
            continue
        singles = sum(gain(small | {j}) - gain(small) for j in big - small)
        ratio = min(ratio, singles / max(joint, RATIO_FLOOR))
        evaluated += 1

    return ProbeReport(
        probe="submodularity",
        instance=f"{len(table)} candidates, dim {table.dim}, lambda {lam:g}",
        measured={
            "ratio": ratio,
            "pairs": evaluated,
            "skipped_pairs": skipped,
            "n_cap": constants.n_cap,
            "u_td_u_grad_q": constants.u_td * constants.u_grad_q,
        },
        subject="ratio",
        relation=">=",
        bound=bound,
        tolerance=1e-9,
        note=SQUARED_GAIN_NOTE,
    )


def cluster_bound_check(table: GradientTable, cluster_count: int, seed: int = 0) -> ProbeReport:
    """Best fit over cluster medoids against the summed nearest-medoid distances.

    Candidate gradients are clustered with seeded k-means++; each centroid is
    replaced by its nearest candidate. The left side is the least-squares
    residual over those medoids, the right side sums every trajectory's
    distance to its nearest medoid.

    Raises:
        ProbeGuardError: ``cluster_count`` outside ``1..candidates``.
    """
    if not 1 <= cluster_count <= len(table):
        raise ProbeGuardError(
            f"cluster count must be in [1, {len(table)}], got {cluster_count}"
        )
    points = table.candidate_grads
    centroids, _ = kmeans2(
        points,
        cluster_count,
        iter=KMEANS_ITERATIONS,
        minit="++",
        missing="warn",
        seed=np.random.default_rng(seed),
    )
    distances = np.linalg.norm(points[:, None, :] - centroids[None, :, :], axis=2)
    medoids = sorted(set(int(i) for i in np.argmin(distances, axis=0)))
    columns = points[medoids].T
    weights = lstsq(columns, table.full_grad)[0]
    lhs = float(np.linalg.norm(columns @ weights - table.full_grad))
    spread = np.linalg.norm(table.all_grads[:, None, :] - points[medoids][None, :, :], axis=2)
    rhs = float(np.sum(np.min(spread, axis=1)))
    return ProbeReport(
        probe="cluster",
        instance=f"{len(table)} candidates, {len(table.all_grads)} trajectories, K={cluster_count}",
        measured={"residual": lhs, "medoids": len(medoids)},
        subject="residual",
        relation="<=",
        bound=rhs,
        tolerance=1e-9,
    )


def greedy_bound(cluster_count: int) -> float:
    """``5 (ln K + 2)``."""
    return 5.0 * (math.log(cluster_count) + 2.0)


def greedy_ratio_check(
    table: GradientTable, k: int, lam: float, cluster_count: int
) -> ProbeReport:
    """Greedy ``Err_lambda`` over the brute-force optimum, against ``5 (ln K + 2)``."""
    optimum = brute_force_optimum(table, k, lam)
    greedy = omp_select(table, lam=lam, tolerance=GREEDY_TOLERANCE, budget=k)
    greedy_err = residual_error_reg(
        greedy.weights, table.rows_for(greedy.ids), table.full_grad, lam
    )
    ratio = max(greedy_err, RATIO_FLOOR) / max(optimum.err, RATIO_FLOOR)
    return ProbeReport(
        probe="greedy",
        instance=f"{len(table)} candidates, k={k}, lambda {lam:g}, K={cluster_count}",
        measured={"ratio": ratio, "greedy_err": greedy_err, "optimal_err": optimum.err},
        subject="ratio",
        relation="<=",
        bound=greedy_bound(cluster_count),
        tolerance=0.0,
    )
