"""Selection configuration section."""

import math
from typing import Literal

from pydantic import BaseModel, Field

from redor.core.config_builder import add_config


class SelectorConfig(BaseModel):
    """Multi-round OMP selection settings."""

    rounds: int = Field(default=50, ge=1, description="Checkpoint rounds T")
    top_percent: float = Field(
        default=50.0, gt=0.0, le=100.0, description="Top-return percent m kept as candidates"
    )
    tolerance: float = Field(default=0.01, gt=0.0, description="Relative stopping tolerance")
    ridge_lambda: float = Field(default=1e-4, ge=0.0, description="Ridge coefficient lambda")
    budget: int | None = Field(
        default=None, ge=1, description="Per-round subset cap N_max (default: budget_fraction)"
    )
    budget_fraction: float = Field(
        default=0.05, gt=0.0, le=1.0, description="N_max as a fraction of the trajectory count"
    )
    target_mode: Literal["mc", "td"] = Field(
        default="mc", description="Critic target: empirical returns (mc) or bootstrapped (td)"
    )
    seed: int = Field(default=0, description="Seed for randomized baselines")

    def budget_for(self, trajectory_count: int) -> int:
        if self.budget is not None:
            return self.budget
        return max(1, math.ceil(round(self.budget_fraction * trajectory_count, 9)))


add_config("select", SelectorConfig)
