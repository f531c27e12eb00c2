"""Dense least-squares helpers: ridge solves via Cholesky and the nonnegative clamp rule."""

import numpy as np
import numpy.typing as npt
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from redor.core.redor_error import DimensionMismatchError, RedorError, SingularSystemError
from redor.core.utils import ensure_finite

RealVector = npt.NDArray[np.float64]
RealMatrix = npt.NDArray[np.float64]

CHOLESKY_JITTER = 1e-10


def _check_system(columns: RealMatrix, target: RealVector, lam: float) -> None:
    if columns.ndim != 2:
        raise DimensionMismatchError(f"columns must be a matrix, got shape {columns.shape}")
    if target.ndim != 1 or target.shape[0] != columns.shape[0]:
        raise DimensionMismatchError(
            f"target has shape {target.shape}, columns have length {columns.shape[0]}"
        )
    if not lam >= 0.0:
        raise RedorError(f"ridge lambda must be non-negative, got {lam}")


def ridge_solve(columns: RealMatrix, target: RealVector, lam: float) -> RealVector:
    """Solve ``argmin_w ||columns @ w - target||^2 + lam * ||w||^2``.

    Uses the normal equations ``(G^T G + lam I) w = G^T target`` with a Cholesky
    factorization; if the factorization fails, ``1e-10 * I`` is added once.

    Args:
        columns: Matrix ``G`` of shape (dim, k), one dictionary element per column.
        target: Vector of length dim.
        lam: Ridge coefficient, ``>= 0``.

    Returns:
        Weight vector of length k.

    Raises:
        SingularSystemError: ``lam == 0`` and the columns are rank deficient, or the
            system stays indefinite after the jitter.
    """
    columns = np.asarray(columns, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    _check_system(columns, target, lam)
    k = columns.shape[1]
    if k == 0:
        return np.zeros(0)
    if lam == 0.0 and np.linalg.matrix_rank(columns) < k:
        raise SingularSystemError(
            f"{k} columns are linearly dependent; use a positive ridge lambda"
        )

    system = columns.T @ columns + lam * np.eye(k)
    rhs = columns.T @ target
    try:
        factor = cho_factor(system)
    except LinAlgError:
        try:
            factor = cho_factor(system + CHOLESKY_JITTER * np.eye(k))
        except LinAlgError as e:
            raise SingularSystemError(f"normal equations are singular: {e}") from e
    weights: RealVector = cho_solve(factor, rhs)
    return ensure_finite(weights, "ridge solution")


def nonnegative_ridge(columns: RealMatrix, target: RealVector, lam: float) -> RealVector:
    """Ridge solve restricted to nonnegative weights by clamp-and-re-solve.

    Columns whose weight is not strictly positive are dropped and the system is
    re-solved on the remaining support until every weight is positive or the
    support is empty. Dropped columns get weight 0.
    """
    columns = np.asarray(columns, dtype=np.float64)
    weights = np.zeros(columns.shape[1])
    active = np.arange(columns.shape[1])
    while active.size:
        solved = ridge_solve(columns[:, active], target, lam)
        positive = solved > 0.0
        if positive.all():
            weights[active] = solved
            break
        active = active[positive]
    return weights


def ridge_objective(
    columns: RealMatrix, weights: RealVector, target: RealVector, lam: float
) -> float:
    """Squared ridge objective ``||G w - target||^2 + lam * ||w||^2``."""
    residual = columns @ weights - target
    return float(residual @ residual + lam * (weights @ weights))
