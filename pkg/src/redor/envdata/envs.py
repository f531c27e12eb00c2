"""Toy continuous-control environments with bounded positive rewards."""

from abc import ABC, abstractmethod
from dataclasses import dataclass

import numpy as np

from redor.core.redor_error import RedorError
from redor.numcore.linalg import RealVector

DEFAULT_R_MAX = 1.0
DEFAULT_HORIZON = 50
DT = 0.1


@dataclass(frozen=True)
class EnvSpec:
    """Static description of an environment: dimensions, horizon, bounds, reward cap."""

    name: str
    obs_dim: int
    act_dim: int
    horizon: int
    action_low: tuple[float, ...]
    action_high: tuple[float, ...]
    r_max: float = DEFAULT_R_MAX

    def __post_init__(self) -> None:
        if self.horizon < 1 or self.obs_dim < 1 or self.act_dim < 1:
            raise RedorError(f"{self.name}: horizon and dimensions must be at least 1")
        if len(self.action_low) != self.act_dim or len(self.action_high) != self.act_dim:
            raise RedorError(f"{self.name}: action bounds must have {self.act_dim} entries")
        low, high = np.asarray(self.action_low), np.asarray(self.action_high)
        if not (np.all(np.isfinite(low)) and np.all(np.isfinite(high)) and np.all(low < high)):
            raise RedorError(f"{self.name}: action bounds must be finite with low < high")
        if not self.r_max > 0.0:
            raise RedorError(f"{self.name}: r_max must be positive")

    @property
    def low(self) -> RealVector:
        return np.asarray(self.action_low, dtype=np.float64)

    @property
    def high(self) -> RealVector:
        return np.asarray(self.action_high, dtype=np.float64)

    def clip_action(self, action: np.ndarray) -> RealVector:
        return np.clip(action, self.low, self.high)


class ToyEnv(ABC):
    """Deterministic dynamics over explicit state vectors; randomness only in `reset`."""

    def __init__(self, spec: EnvSpec):
        self.spec = spec

    @abstractmethod
    def reset(self, rng: np.random.Generator, at_goal: bool = False) -> RealVector:
        """Sample a start state; ``at_goal`` starts exactly on the goal."""

    @abstractmethod
    def step(self, state: RealVector, action: RealVector) -> tuple[RealVector, float]:
        """Return ``(next_state, reward)``; the action is clipped to the bounds."""

    @abstractmethod
    def expert_action(self, state: RealVector) -> RealVector:
        """Noise-free controller toward the goal."""

    def reward(self, distance: float) -> float:
        return float(self.spec.r_max * np.exp(-distance))


class PointMassReach(ToyEnv):
    """2-D point mass; state is position followed by the offset to the goal."""

    GAIN = 5.0
    BOUND = 2.0

    def __init__(self, horizon: int = DEFAULT_HORIZON, r_max: float = DEFAULT_R_MAX):
        super().__init__(
            EnvSpec(
                name="point-mass",
                obs_dim=4,
                act_dim=2,
                horizon=horizon,
                action_low=(-1.0, -1.0),
                action_high=(1.0, 1.0),
                r_max=r_max,
            )
        )

    def reset(self, rng: np.random.Generator, at_goal: bool = False) -> RealVector:
        position = rng.uniform(-1.0, 1.0, size=2)
        goal = position.copy() if at_goal else rng.uniform(-1.0, 1.0, size=2)
        return np.concatenate([position, goal - position])

    def step(self, state: RealVector, action: RealVector) -> tuple[RealVector, float]:
        position, goal = state[:2], state[:2] + state[2:]
        position = np.clip(position + DT * self.spec.clip_action(action), -self.BOUND, self.BOUND)
        offset = goal - position
        return np.concatenate([position, offset]), self.reward(float(np.linalg.norm(offset)))

    def expert_action(self, state: RealVector) -> RealVector:
        return self.spec.clip_action(self.GAIN * state[2:])


class DoubleIntegrator(ToyEnv):
    """1-D double integrator; state is position, velocity and offset to the goal."""

    KP = 4.0
    KD = 3.0
    BOUND = 2.0
    MAX_SPEED = 1.0

    def __init__(self, horizon: int = DEFAULT_HORIZON, r_max: float = DEFAULT_R_MAX):
        super().__init__(
            EnvSpec(
                name="double-integrator",
                obs_dim=3,
                act_dim=1,
                horizon=horizon,
                action_low=(-1.0,),
                action_high=(1.0,),
                r_max=r_max,
            )
        )

    def reset(self, rng: np.random.Generator, at_goal: bool = False) -> RealVector:
        position = rng.uniform(-1.0, 1.0)
        goal = position if at_goal else rng.uniform(-1.0, 1.0)
        return np.array([position, 0.0, goal - position])

    def step(self, state: RealVector, action: RealVector) -> tuple[RealVector, float]:
        position, velocity, goal = state[0], state[1], state[0] + state[2]
        accel = float(self.spec.clip_action(action)[0])
        velocity = float(np.clip(velocity + DT * accel, -self.MAX_SPEED, self.MAX_SPEED))
        position = float(np.clip(position + DT * velocity, -self.BOUND, self.BOUND))
        offset = goal - position
        return np.array([position, velocity, offset]), self.reward(abs(offset))

    def expert_action(self, state: RealVector) -> RealVector:
        return self.spec.clip_action(np.array([self.KP * state[2] - self.KD * state[1]]))


ENVIRONMENTS: dict[str, type[ToyEnv]] = {
    "point-mass": PointMassReach,
    "double-integrator": DoubleIntegrator,
}


def make_env(
    name: str, horizon: int = DEFAULT_HORIZON, r_max: float = DEFAULT_R_MAX
) -> ToyEnv:
    """Instantiate a registered environment by name."""
    if name not in ENVIRONMENTS:
        raise RedorError(f"unknown environment '{name}'; valid: {', '.join(ENVIRONMENTS)}")
    return ENVIRONMENTS[name](horizon=horizon, r_max=r_max)


def env_for_spec(spec: EnvSpec) -> ToyEnv:
    """Dynamics matching a spec read from a dataset header."""
    env = make_env(spec.name, spec.horizon, spec.r_max)
    if env.spec != spec:
        raise RedorError(f"spec {spec} does not match the registered '{spec.name}' environment")
    return env
