"""Gradient-matching trajectory selection and the baseline selectors."""

from redor.selector.baselines import BASELINES, baseline_select, td_priorities
from redor.selector.config import SelectorConfig
from redor.selector.gradients import (
    GradientTable,
    build_gradient_table,
    top_return_filter,
    trajectory_gradient,
)
from redor.selector.io import read_selection, write_selection
from redor.selector.omp import Selection, omp_select, residual_error, residual_error_reg
from redor.selector.redor import ReducedDataset, merge_selections, redor

__all__ = [
    "BASELINES",
    "GradientTable",
    "ReducedDataset",
    "Selection",
    "SelectorConfig",
    "baseline_select",
    "build_gradient_table",
    "merge_selections",
    "omp_select",
    "read_selection",
    "redor",
    "residual_error",
    "residual_error_reg",
    "td_priorities",
    "top_return_filter",
    "trajectory_gradient",
    "write_selection",
]
