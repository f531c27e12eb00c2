"""Toy environments, behaviour policies, offline datasets and their file format."""

from redor.envdata import config as _config  # noqa: F401  (registers the "env" section)
from redor.envdata.dataset import (
    DEFAULT_GAMMA,
    OfflineDataset,
    Provenance,
    Trajectory,
    Transition,
    TransitionBatch,
    discounted_return,
    generate_dataset,
    returns_to_go,
    rollout,
)
from redor.envdata.envs import (
    ENVIRONMENTS,
    DoubleIntegrator,
    EnvSpec,
    PointMassReach,
    ToyEnv,
    env_for_spec,
    make_env,
)
from redor.envdata.io import read_dataset, write_dataset
from redor.envdata.policies import BEHAVIOR_POLICIES, PolicyMixEntry, behavior_policy

__all__ = [
    "BEHAVIOR_POLICIES",
    "DEFAULT_GAMMA",
    "DoubleIntegrator",
    "ENVIRONMENTS",
    "EnvSpec",
    "OfflineDataset",
    "PointMassReach",
    "PolicyMixEntry",
    "Provenance",
    "ToyEnv",
    "Trajectory",
    "Transition",
    "TransitionBatch",
    "behavior_policy",
    "discounted_return",
    "env_for_spec",
    "generate_dataset",
    "make_env",
    "read_dataset",
    "returns_to_go",
    "rollout",
    "write_dataset",
]
