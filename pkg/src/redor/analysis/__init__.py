"""Numerical checks of the selector's guarantees, probe reports and run metrics."""

from redor.analysis.config import ProbeConfig
from redor.analysis.convergence import (
    SCHEDULES,
    ConvergenceTrace,
    QuadraticProblem,
    convergence_bound_check,
    critic_convergence_trace,
    monotone_descent_check,
    quadratic_convergence_trace,
)
from redor.analysis.metrics import (
    METRICS_COLUMNS,
    MethodSummary,
    MetricsRow,
    export_metrics,
    read_metrics,
    summarize,
)
from redor.analysis.oracles import (
    Optimum,
    brute_force_optimum,
    cluster_bound_check,
    greedy_bound,
    greedy_ratio_check,
    submodularity_ratio_probe,
)
from redor.analysis.reports import (
    BoundConstants,
    ProbeReport,
    measure_bound_constants,
    read_probe_reports,
    write_probe_reports,
)
from redor.analysis.suite import PROBES, clustered_table, random_table, run_probes

__all__ = [
    "BoundConstants",
    "ConvergenceTrace",
    "METRICS_COLUMNS",
    "MethodSummary",
    "MetricsRow",
    "Optimum",
    "PROBES",
    "ProbeConfig",
    "ProbeReport",
    "QuadraticProblem",
    "SCHEDULES",
    "brute_force_optimum",
    "cluster_bound_check",
    "clustered_table",
    "convergence_bound_check",
    "critic_convergence_trace",
    "export_metrics",
    "greedy_bound",
    "greedy_ratio_check",
    "measure_bound_constants",
    "monotone_descent_check",
    "quadratic_convergence_trace",
    "random_table",
    "read_metrics",
    "read_probe_reports",
    "run_probes",
    "submodularity_ratio_probe",
    "summarize",
    "write_probe_reports",
]
