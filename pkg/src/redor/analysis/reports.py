"""Probe reports and the empirical constants behind the submodularity bound."""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Literal

import numpy as np

from redor.agent.config import TrainConfig
from redor.agent.losses import td_targets
from redor.agent.params import AgentParams, actor_trace
from redor.core.redor_error import DatasetFormatError, RedorError
from redor.envdata.dataset import OfflineDataset
from redor.envdata.io import dumps_line, read_records, require_keys, write_lines
from redor.numcore.mlp import backward_trace, forward_trace, per_sample_grad_norms

Relation = Literal["<=", ">="]
REPORT_KEYS = (
    "probe",
    "instance",
    "measured",
    "subject",
    "relation",
    "bound",
    "tolerance",
    "passed",
)


def _holds(value: float, relation: str, bound: float, tolerance: float) -> bool:
    if relation == "<=":
        return value <= bound + tolerance
    if relation == ">=":
        return value >= bound - tolerance
    raise RedorError(f"unknown relation '{relation}'")


@dataclass(frozen=True)
class ProbeReport:
    """Outcome of one probe: ``measured[subject] relation bound`` within ``tolerance``."""

    probe: str
    instance: str
    measured: dict[str, float]
    subject: str
    relation: Relation
    bound: float
    tolerance: float
    passed: bool = field(default=False)
    note: str = ""

    def __post_init__(self) -> None:
        if self.subject not in self.measured:
            raise RedorError(f"probe {self.probe}: '{self.subject}' is not a measured quantity")
        object.__setattr__(self, "measured", {k: float(v) for k, v in self.measured.items()})
        object.__setattr__(self, "passed", self.recheck())

    def recheck(self) -> bool:
        """Recompute the pass flag from the recorded numbers."""
        return _holds(self.measured[self.subject], self.relation, self.bound, self.tolerance)

    def to_record(self) -> dict[str, object]:
        return {
            "probe": self.probe,
            "instance": self.instance,
            "measured": self.measured,
            "subject": self.subject,
            "relation": self.relation,
            "bound": self.bound,
            "tolerance": self.tolerance,
            "passed": self.passed,
            "note": self.note,
        }


def write_probe_reports(reports: list[ProbeReport], path: str | Path) -> Path:
    return write_lines(path, [dumps_line(r.to_record()) for r in reports])


def read_probe_reports(path: str | Path) -> list[ProbeReport]:
    """Load reports, rejecting any whose stored pass flag disagrees with its numbers."""
    reports = []
    for line_number, record in read_records(path):
        require_keys(record, REPORT_KEYS, line_number)
        try:
            report = ProbeReport(
                probe=str(record["probe"]),
                instance=str(record["instance"]),
                measured=dict(record["measured"]),
                subject=str(record["subject"]),
                relation=record["relation"],
                bound=float(record["bound"]),
                tolerance=float(record["tolerance"]),
                note=str(record.get("note", "")),
            )
        except (RedorError, TypeError, ValueError) as e:
            raise DatasetFormatError(f"invalid probe report: {e}", line_number) from e
        if report.passed != bool(record["passed"]):
            raise DatasetFormatError("stored pass flag disagrees with the numbers", line_number)
        reports.append(report)
    return reports


@dataclass(frozen=True)
class BoundConstants:
    """Empirical maxima over a dataset at one checkpoint, plus the subset cap and lambda.

    Attributes:
        u_td: max |TD error|.
        u_grad_q: max ||grad_theta Q(s, a)||.
        u_grad_a: max ||grad_a Q(s, a)||.
        u_a: max ||a|| over dataset actions.
        u_pi: max ||pi(s)||.
        u_grad_pi: max Frobenius norm of the actor Jacobian d pi(s) / d phi.
        n_cap: Subset cap N.
        lam: Ridge coefficient.
    """

    u_td: float
    u_grad_q: float
    u_grad_a: float
    u_a: float
    u_pi: float
    u_grad_pi: float
    n_cap: int
    lam: float

    def __post_init__(self) -> None:
        values = (self.u_td, self.u_grad_q, self.u_grad_a, self.u_a, self.u_pi, self.u_grad_pi)
        if any(not np.isfinite(v) or v < 0.0 for v in values) or self.n_cap < 1 or self.lam < 0:
            raise RedorError("bound constants must be finite and nonnegative with n_cap >= 1")

    def submodularity_bound(self) -> float:
        """``lam / (lam + 4 N (U_TD U_gradQ)^2)``; 0 when lambda is 0."""
        if self.lam == 0.0:
            return 0.0
        return self.lam / (self.lam + 4.0 * self.n_cap * (self.u_td * self.u_grad_q) ** 2)


def measure_bound_constants(
    dataset: OfflineDataset,
    params: AgentParams,
    n_cap: int,
    lam: float,
    cfg: TrainConfig | None = None,
) -> BoundConstants:
    """Exact maxima of the six bounded quantities over every transition of ``dataset``."""
    batch = dataset.transition_batch()
    n = len(batch)
    critic_trace = forward_trace(params.critic, np.concatenate([batch.states, batch.actions], 1))
    td_error = critic_trace.activations[-1][:, 0] - td_targets(params, batch, cfg)
    ones = np.ones((n, 1))
    grad_q = per_sample_grad_norms(params.critic, critic_trace, ones)
    _, input_grad = backward_trace(params.critic, critic_trace, ones)
    grad_a = np.linalg.norm(input_grad[:, params.obs_dim :], axis=1)

    actions, trace, squashed = actor_trace(params, params.actor, batch.states)
    jacobian_sq = np.zeros(n)
    for j in range(params.act_dim):
        output_grad = np.zeros_like(squashed)
        output_grad[:, j] = params.action_scale[j] * (1.0 - squashed[:, j] ** 2)
        jacobian_sq += per_sample_grad_norms(params.actor, trace, output_grad) ** 2

    return BoundConstants(
        u_td=float(np.max(np.abs(td_error))),
        u_grad_q=float(np.max(grad_q)),
        u_grad_a=float(np.max(grad_a)),
        u_a=float(np.max(np.linalg.norm(batch.actions, axis=1))),
        u_pi=float(np.max(np.linalg.norm(actions, axis=1))),
        u_grad_pi=float(np.sqrt(np.max(jacobian_sq))),
        n_cap=n_cap,
        lam=lam,
    )
