"""Settings for the built-in probe instances."""

from typing import Literal

from pydantic import BaseModel, Field

from redor.core.config_builder import add_config


class ProbeConfig(BaseModel):
    """Sizes of the synthetic instances the probe suite builds per seed."""

    candidates: int = Field(default=8, ge=1, le=10, description="Instance size for F probes")
    greedy_candidates: int = Field(
        default=10, ge=1, le=14, description="Dictionary size for the greedy ratio probe"
    )
    dim: int = Field(default=16, ge=1, description="Gradient dimension of synthetic tables")
    lam_scale: float = Field(
        default=1.0, ge=0.0, description="Ridge lambda as a multiple of ||full gradient||^2"
    )
    pair_budget: int | None = Field(
        default=None, ge=1, description="Sampled (S, T) pairs; all pairs when unset"
    )
    greedy_lambda: float = Field(
        default=1e-4, ge=0.0, description="Ridge lambda for the greedy probe"
    )
    subset_cap: int = Field(default=3, ge=1, le=4, description="Subset cap k")
    cluster_count: int = Field(default=3, ge=1, description="Cluster count K")
    clusters_per_table: int = Field(default=3, ge=1, description="True clusters in the table")
    quadratic_samples: int = Field(default=40, ge=2, description="Rows of the quadratic toy")
    quadratic_dim: int = Field(default=5, ge=1, description="Parameters of the quadratic toy")
    coreset_size: int = Field(default=8, ge=1, description="OMP budget on the quadratic toy")
    steps: int = Field(default=50, ge=1, description="Descent steps")
    critic_trajectories: int = Field(
        default=8, ge=2, description="Point-mass trajectories for the critic convergence run"
    )
    critic_horizon: int = Field(default=6, ge=1, description="Episode length of that dataset")
    critic_rounds: int = Field(default=3, ge=1, description="Checkpoint rounds T for its subset")
    critic_pretrain_steps: int = Field(
        default=30, ge=1, description="TD3+BC steps producing the checkpoints"
    )
    critic_steps: int = Field(default=10, ge=1, description="Critic descent steps on the subset")
    critic_lr: float = Field(default=0.01, gt=0.0, description="Critic descent learning rate")
    schedule: Literal["constant", "bound", "decay"] = Field(
        default="constant", description="Descent learning-rate schedule"
    )


add_config("probe", ProbeConfig)
