"""Scripted behaviour policies used to generate offline datasets."""

from collections.abc import Callable
from dataclasses import dataclass

import numpy as np

from redor.core.redor_error import RedorError
from redor.envdata.envs import ToyEnv
from redor.numcore.linalg import RealVector

MEDIUM_RANDOM_PROB = 0.5


@dataclass(frozen=True)
class PolicyMixEntry:
    """``count`` trajectories from behaviour policy ``policy`` with noise std ``noise``."""

    policy: str
    count: int
    noise: float = 0.0

    def __post_init__(self) -> None:
        if self.policy not in BEHAVIOR_POLICIES:
            raise RedorError(
                f"unknown policy '{self.policy}'; valid: {', '.join(BEHAVIOR_POLICIES)}"
            )
        if self.count < 0:
            raise RedorError(f"policy '{self.policy}': count must be >= 0, got {self.count}")
        if not self.noise >= 0.0:
            raise RedorError(f"policy '{self.policy}': noise must be >= 0, got {self.noise}")


def expert_policy(
    env: ToyEnv, state: RealVector, noise: float, rng: np.random.Generator
) -> RealVector:
    action = env.expert_action(state) + rng.normal(0.0, noise, size=env.spec.act_dim)
    return env.spec.clip_action(action)


def random_policy(
    env: ToyEnv, state: RealVector, noise: float, rng: np.random.Generator
) -> RealVector:
    return rng.uniform(env.spec.low, env.spec.high)


def medium_policy(
    env: ToyEnv, state: RealVector, noise: float, rng: np.random.Generator
) -> RealVector:
    if rng.random() < MEDIUM_RANDOM_PROB:
        return random_policy(env, state, noise, rng)
    return expert_policy(env, state, noise, rng)


BEHAVIOR_POLICIES: dict[
    str, Callable[[ToyEnv, RealVector, float, np.random.Generator], RealVector]
] = {
    "expert": expert_policy,
    "medium": medium_policy,
    "random": random_policy,
}


def behavior_policy(
    name: str,
) -> Callable[[ToyEnv, RealVector, float, np.random.Generator], RealVector]:
    """Look up a behaviour policy by id."""
    if name not in BEHAVIOR_POLICIES:
        raise RedorError(f"unknown policy '{name}'; valid: {', '.join(BEHAVIOR_POLICIES)}")
    return BEHAVIOR_POLICIES[name]
