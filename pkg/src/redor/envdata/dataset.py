"""Trajectories, offline datasets, return computations and dataset generation."""

from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np

from redor.core.redor_error import DatasetValidationError, DimensionMismatchError, RedorError
from redor.core.utils import ensure_finite
from redor.envdata.envs import EnvSpec, ToyEnv, env_for_spec
from redor.envdata.policies import PolicyMixEntry, behavior_policy
from redor.numcore.linalg import RealMatrix, RealVector

DEFAULT_GAMMA = 0.99


def _check_gamma(gamma: float) -> None:
    if not 0.0 < gamma <= 1.0:
        raise RedorError(f"gamma must be in (0, 1], got {gamma}")


def discounted_return(rewards: Sequence[float] | np.ndarray, gamma: float) -> float:
    """``sum_k gamma**k * rewards[k]``; 0 for an empty list."""
    _check_gamma(gamma)
    total = 0.0
    for reward in reversed(np.asarray(rewards, dtype=np.float64).tolist()):
        total = reward + gamma * total
    return total


def returns_to_go(rewards: Sequence[float] | np.ndarray, gamma: float) -> RealVector:
    """Discounted return of every suffix, in one backward pass."""
    _check_gamma(gamma)
    values = np.asarray(rewards, dtype=np.float64)
    out = np.empty_like(values)
    running = 0.0
    for t in range(len(values) - 1, -1, -1):
        running = float(values[t]) + gamma * running
        out[t] = running
    return out


def _frozen(array: np.ndarray, dtype: type = np.float64) -> np.ndarray:
    copy = np.array(array, dtype=dtype)
    copy.setflags(write=False)
    return copy


@dataclass(frozen=True)
class Transition:
    state: RealVector
    action: RealVector
    reward: float
    next_state: RealVector
    terminal: bool


@dataclass(frozen=True, eq=False)
class Trajectory:
    """One episode of ``K`` steps.

    ``states`` holds the ``K + 1`` visited states, so step ``t`` goes from
    ``states[t]`` to ``states[t + 1]`` and consecutive transitions always chain.
    ``terminal`` marks whether the last step ended the episode (as opposed to a
    time-limit cut).
    """

    states: RealMatrix
    actions: RealMatrix
    rewards: RealVector
    gamma: float
    terminal: bool = False
    returns_to_go: RealVector = field(init=False)
    total_return: float = field(init=False)

    def __post_init__(self) -> None:
        _check_gamma(self.gamma)
        object.__setattr__(self, "states", _frozen(self.states))
        object.__setattr__(self, "actions", _frozen(self.actions))
        object.__setattr__(self, "rewards", _frozen(self.rewards))
        if self.states.ndim != 2 or self.actions.ndim != 2 or self.rewards.ndim != 1:
            raise DimensionMismatchError("states and actions must be 2-D, rewards 1-D")
        steps = len(self.rewards)
        if steps < 1:
            raise DimensionMismatchError("a trajectory needs at least one transition")
        if self.actions.shape[0] != steps or self.states.shape[0] != steps + 1:
            raise DimensionMismatchError(
                f"{steps} rewards need {steps} actions and {steps + 1} states, got "
                f"{self.actions.shape[0]} and {self.states.shape[0]}"
            )
        for name in ("states", "actions", "rewards"):
            ensure_finite(getattr(self, name), name)
        rtg = _frozen(returns_to_go(self.rewards, self.gamma))
        object.__setattr__(self, "returns_to_go", rtg)
        object.__setattr__(self, "total_return", float(rtg[0]))

    def __len__(self) -> int:
        return len(self.rewards)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Trajectory):
            return NotImplemented
        return (
            self.gamma == other.gamma
            and self.terminal == other.terminal
            and np.array_equal(self.states, other.states)
            and np.array_equal(self.actions, other.actions)
            and np.array_equal(self.rewards, other.rewards)
        )

    @property
    def obs_dim(self) -> int:
        return int(self.states.shape[1])

    @property
    def act_dim(self) -> int:
        return int(self.actions.shape[1])

    @property
    def terminals(self) -> np.ndarray:
        flags = np.zeros(len(self), dtype=bool)
        flags[-1] = self.terminal
        return flags

    @property
    def transitions(self) -> list[Transition]:
        last = len(self) - 1
        return [
            Transition(
                state=self.states[t],
                action=self.actions[t],
                reward=float(self.rewards[t]),
                next_state=self.states[t + 1],
                terminal=self.terminal and t == last,
            )
            for t in range(len(self))
        ]


@dataclass(frozen=True, eq=False)
class TransitionBatch:
    """Column arrays of transitions, each tagged with its trajectory id and weight."""

    states: RealMatrix
    actions: RealMatrix
    rewards: RealVector
    next_states: RealMatrix
    terminals: np.ndarray
    returns_to_go: RealVector
    trajectory_ids: np.ndarray
    weights: RealVector

    def __len__(self) -> int:
        return len(self.rewards)

    def take(self, indices: np.ndarray) -> "TransitionBatch":
        return TransitionBatch(
            states=self.states[indices],
            actions=self.actions[indices],
            rewards=self.rewards[indices],
            next_states=self.next_states[indices],
            terminals=self.terminals[indices],
            returns_to_go=self.returns_to_go[indices],
            trajectory_ids=self.trajectory_ids[indices],
            weights=self.weights[indices],
        )

    @classmethod
    def from_transitions(
        cls,
        transitions: Sequence[Transition],
        returns: Sequence[float] | None = None,
    ) -> "TransitionBatch":
        """Batch built from loose transitions; ids are 0 and weights 1."""
        if not transitions:
            raise RedorError("cannot build a batch from zero transitions")
        count = len(transitions)
        return cls(
            states=np.array([t.state for t in transitions], dtype=np.float64),
            actions=np.array([t.action for t in transitions], dtype=np.float64),
            rewards=np.array([t.reward for t in transitions], dtype=np.float64),
            next_states=np.array([t.next_state for t in transitions], dtype=np.float64),
            terminals=np.array([t.terminal for t in transitions], dtype=bool),
            returns_to_go=(
                np.zeros(count) if returns is None else np.asarray(returns, dtype=np.float64)
            ),
            trajectory_ids=np.zeros(count, dtype=np.int64),
            weights=np.ones(count),
        )


@dataclass(frozen=True)
class Provenance:
    """How a dataset was produced: generator seed and behaviour-policy mix."""

    seed: int | None = None
    policy_mix: tuple[PolicyMixEntry, ...] = ()


@dataclass(frozen=True, eq=False)
class OfflineDataset:
    """A fixed collection of trajectories collected in one environment."""

    env: EnvSpec
    gamma: float
    trajectories: tuple[Trajectory, ...]
    provenance: Provenance = field(default_factory=Provenance)

    def __post_init__(self) -> None:
        _check_gamma(self.gamma)
        object.__setattr__(self, "trajectories", tuple(self.trajectories))
        if not self.trajectories:
            raise RedorError("an offline dataset needs at least one trajectory")
        for index, trajectory in enumerate(self.trajectories):
            if trajectory.obs_dim != self.env.obs_dim:
                raise DatasetValidationError(
                    f"state dimension {trajectory.obs_dim}, expected {self.env.obs_dim}", index
                )
            if trajectory.act_dim != self.env.act_dim:
                raise DatasetValidationError(
                    f"action dimension {trajectory.act_dim}, expected {self.env.act_dim}", index
                )
            if trajectory.gamma != self.gamma:
                raise DatasetValidationError(
                    f"gamma {trajectory.gamma} differs from dataset gamma {self.gamma}", index
                )
            if np.any(trajectory.rewards < 0.0) or np.any(trajectory.rewards > self.env.r_max):
                raise DatasetValidationError(
                    f"rewards must lie in [0, {self.env.r_max}]", index
                )

    def __len__(self) -> int:
        return len(self.trajectories)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, OfflineDataset):
            return NotImplemented
        return (
            self.env == other.env
            and self.gamma == other.gamma
            and self.provenance == other.provenance
            and self.trajectories == other.trajectories
        )

    @property
    def transition_count(self) -> int:
        return sum(len(t) for t in self.trajectories)

    @property
    def total_returns(self) -> RealVector:
        return np.array([t.total_return for t in self.trajectories])

    def check_ids(self, ids: Sequence[int] | np.ndarray) -> list[int]:
        """Validate trajectory ids against this dataset and return them as ints."""
        out = [int(i) for i in ids]
        bad = [i for i in out if not 0 <= i < len(self)]
        if bad:
            raise RedorError(
                f"trajectory ids {bad} out of range for a dataset of {len(self)} trajectories"
            )
        return out

    def transition_batch(
        self,
        ids: Sequence[int] | np.ndarray | None = None,
        weights: Sequence[float] | np.ndarray | None = None,
    ) -> TransitionBatch:
        """Every transition of the trajectories ``ids`` (default: all), in id order given.

        Each transition carries its trajectory's weight (default 1).
        """
        chosen = list(range(len(self))) if ids is None else self.check_ids(ids)
        if not chosen:
            raise RedorError("cannot build a batch from zero trajectories")
        per_traj = np.ones(len(chosen)) if weights is None else np.asarray(weights, float)
        if per_traj.shape != (len(chosen),):
            raise DimensionMismatchError(
                f"{len(per_traj)} weights given for {len(chosen)} trajectories"
            )
        parts = [self.trajectories[i] for i in chosen]
        lengths = [len(t) for t in parts]
        return TransitionBatch(
            states=np.concatenate([t.states[:-1] for t in parts]),
            actions=np.concatenate([t.actions for t in parts]),
            rewards=np.concatenate([t.rewards for t in parts]),
            next_states=np.concatenate([t.states[1:] for t in parts]),
            terminals=np.concatenate([t.terminals for t in parts]),
            returns_to_go=np.concatenate([t.returns_to_go for t in parts]),
            trajectory_ids=np.repeat(np.asarray(chosen, dtype=np.int64), lengths),
            weights=np.repeat(per_traj, lengths),
        )


def rollout(
    env: ToyEnv,
    policy: str,
    noise: float,
    rng: np.random.Generator,
    gamma: float = DEFAULT_GAMMA,
) -> Trajectory:
    """Run one behaviour-policy episode of ``env.spec.horizon`` steps."""
    act = behavior_policy(policy)
    state = env.reset(rng)
    states, actions, rewards = [state], [], []
    for _ in range(env.spec.horizon):
        action = act(env, state, noise, rng)
        state, reward = env.step(state, action)
        states.append(state)
        actions.append(action)
        rewards.append(reward)
    return Trajectory(np.array(states), np.array(actions), np.array(rewards), gamma)


def generate_dataset(
    env: EnvSpec,
    policy_mix: Sequence[PolicyMixEntry | tuple[str, int, float]],
    seed: int,
    gamma: float = DEFAULT_GAMMA,
) -> OfflineDataset:
    """Roll out each policy-mix entry in order from a single seeded generator.

    Args:
        env: Environment to collect in.
        policy_mix: ``(policy id, trajectory count, noise scale)`` entries.
        seed: Generator seed; equal seeds give equal datasets.
        gamma: Discount used for returns-to-go.

    Raises:
        RedorError: Unknown policy id, negative count, or zero trajectories in total.
    """
    entries = tuple(
        e if isinstance(e, PolicyMixEntry) else PolicyMixEntry(e[0], int(e[1]), float(e[2]))
        for e in policy_mix
    )
    if sum(e.count for e in entries) < 1:
        raise RedorError("the policy mix must produce at least one trajectory")
    rng = np.random.default_rng(seed)
    dynamics = env_for_spec(env)
    trajectories = [
        rollout(dynamics, entry.policy, entry.noise, rng, gamma)
        for entry in entries
        for _ in range(entry.count)
    ]
    return OfflineDataset(env, gamma, tuple(trajectories), Provenance(seed, entries))
