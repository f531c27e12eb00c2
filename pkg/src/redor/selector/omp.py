"""Regularized orthogonal matching pursuit over a gradient dictionary."""

from dataclasses import dataclass
from typing import Any

import numpy as np

from redor.core.redor_error import DimensionMismatchError, RedorError, SingularSystemError
from redor.core.utils import config_section, get_config_value
from redor.numcore.linalg import RealMatrix, RealVector, nonnegative_ridge
from redor.selector.config import SelectorConfig
from redor.selector.gradients import GradientTable

CORRELATION_FLOOR = 1e-12


def _as_rows(weights: np.ndarray, grads: np.ndarray, full_grad: np.ndarray) -> RealMatrix:
    rows = np.asarray(grads, dtype=np.float64)
    if rows.size != len(weights) * len(full_grad):
        raise DimensionMismatchError(
            f"{len(weights)} weights and gradients of shape {rows.shape} do not match "
            f"a full gradient of length {len(full_grad)}"
        )
    return rows.reshape(len(weights), len(full_grad))


def residual_error(weights: np.ndarray, grads: np.ndarray, full_grad: np.ndarray) -> float:
    """``|| sum_i w_i g_i - g ||_2`` with one gradient per row of ``grads``."""
    weights = np.asarray(weights, dtype=np.float64)
    full_grad = np.asarray(full_grad, dtype=np.float64)
    rows = _as_rows(weights, grads, full_grad)
    approx = weights @ rows if len(weights) else np.zeros_like(full_grad)
    return float(np.linalg.norm(approx - full_grad))


def residual_error_reg(
    weights: np.ndarray, grads: np.ndarray, full_grad: np.ndarray, lam: float
) -> float:
    """`residual_error` plus ``lam * ||w||^2``."""
    if not lam >= 0.0:
        raise RedorError(f"ridge lambda must be non-negative, got {lam}")
    weights = np.asarray(weights, dtype=np.float64)
    return residual_error(weights, grads, full_grad) + lam * float(weights @ weights)


@dataclass(frozen=True, eq=False)
class Selection:
    """Weighted trajectory subset with the per-iteration ``Err_lambda`` history."""

    ids: tuple[int, ...]
    weights: RealVector
    residual_history: tuple[float, ...] = ()
    round_index: int = 1

    def __post_init__(self) -> None:
        object.__setattr__(self, "ids", tuple(int(i) for i in self.ids))
        weights = np.array(self.weights, dtype=np.float64).reshape(-1)
        weights.setflags(write=False)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "residual_history", tuple(float(r) for r in self.residual_history))
        if len(self.ids) != len(weights):
            raise RedorError(f"{len(self.ids)} ids but {len(weights)} weights")
        if len(set(self.ids)) != len(self.ids):
            raise RedorError("selection ids must be unique")
        if not np.all(np.isfinite(weights)) or np.any(weights < 0.0):
            raise RedorError("selection weights must be finite and nonnegative")
        history = self.residual_history
        if any(later > earlier for earlier, later in zip(history, history[1:])):
            raise RedorError(f"round {self.round_index}: residual history increases: {history}")

    def __len__(self) -> int:
        return len(self.ids)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Selection):
            return NotImplemented
        return (
            self.ids == other.ids
            and np.array_equal(self.weights, other.weights)
            and self.residual_history == other.residual_history
            and self.round_index == other.round_index
        )

    def as_dict(self) -> dict[int, float]:
        return {i: float(w) for i, w in zip(self.ids, self.weights)}

    @property
    def final_residual(self) -> float | None:
        return self.residual_history[-1] if self.residual_history else None


def omp_select(
    table: GradientTable,
    cfg: SelectorConfig | None = None,
    lam: float | None = None,
    tolerance: float | None = None,
    budget: int | None = None,
) -> Selection:
    """Greedy weighted subset whose gradient sum matches ``table.full_grad``.

    Each iteration picks the unselected candidate most correlated (in absolute
    value) with the residual vector, lowest id first on ties, then re-solves
    nonnegative ridge weights over the selection. Candidates whose weight
    clamps to zero leave the selection for good. A step that would raise
    ``Err_lambda`` is rejected and its candidate excluded, so the recorded
    history never increases.

    Stops when ``Err_lambda / ||g|| <= tolerance``, the selection reaches
    ``budget``, or no remaining candidate correlates with the residual.

    Args:
        table: Gradient dictionary.
        cfg: Defaults for ``lam``, ``tolerance`` and ``budget``; falls back to
            the ``select`` config section.
        lam: Ridge coefficient.
        tolerance: Relative stopping tolerance.
        budget: Maximum subset size ``N_max``.
    """
    section: Any = cfg if cfg is not None else config_section("select") or SelectorConfig()
    lam = get_config_value(lam, section, "ridge_lambda", 0.0)
    tolerance = get_config_value(tolerance, section, "tolerance")
    n_max = budget if budget is not None else section.budget_for(len(table.all_grads))
    if len(table) == 0:
        raise RedorError("omp_select needs at least one candidate")
    if n_max < 1:
        raise RedorError(f"budget must be >= 1, got {n_max}")

    grads, target = table.candidate_grads, table.full_grad
    target_norm = float(np.linalg.norm(target))
    col_norms = np.linalg.norm(grads, axis=1)
    selected: list[int] = []
    excluded: set[int] = set()
    weights = np.zeros(0)
    current = target_norm
    history: list[float] = []

    while target_norm > 0.0 and len(selected) < n_max and current / target_norm > tolerance:
        residual = target - (weights @ grads[selected] if selected else 0.0)
        correlation = np.abs(grads @ residual)
        blocked = selected + sorted(excluded)
        correlation[blocked] = -np.inf
        best = int(np.argmax(correlation))
        floor = CORRELATION_FLOOR * float(np.linalg.norm(residual)) * max(col_norms[best], 1.0)
        if not correlation[best] > floor:
            break

        trial = selected + [best]
        try:
            solved = nonnegative_ridge(grads[trial].T, target, lam)
        except SingularSystemError:
            excluded.add(best)
            continue
        keep = solved > 0.0
        support = [j for j, k in zip(trial, keep) if k]
        err = residual_error_reg(solved[keep], grads[support], target, lam)
        if err > current:
            excluded.add(best)
            continue
        excluded.update(j for j, k in zip(trial, keep) if not k)
        selected, weights, current = support, solved[keep], err
        history.append(err)

    order = np.argsort([table.candidate_ids[j] for j in selected], kind="stable")
    return Selection(
        ids=tuple(table.candidate_ids[selected[i]] for i in order),
        weights=weights[order] if len(selected) else np.zeros(0),
        residual_history=tuple(history),
        round_index=table.round_index,
    )
