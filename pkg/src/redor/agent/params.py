"""Actor and critic networks with their target copies."""

from dataclasses import dataclass, replace

import numpy as np

from redor.envdata.envs import EnvSpec
from redor.numcore.linalg import RealMatrix, RealVector
from redor.numcore.mlp import (
    HIDDEN_DIM,
    HIDDEN_LAYERS,
    MlpParams,
    MlpTrace,
    forward_trace,
    init_mlp,
    mlp_forward,
    mlp_layer_sizes,
)


@dataclass(frozen=True, eq=False)
class AgentParams:
    """Critic ``Q(s, a)``, tanh-squashed actor ``pi(s)`` and their target copies."""

    critic: MlpParams
    actor: MlpParams
    critic_target: MlpParams
    actor_target: MlpParams
    action_low: tuple[float, ...]
    action_high: tuple[float, ...]
    step: int = 0

    @property
    def obs_dim(self) -> int:
        return self.actor.input_dim

    @property
    def act_dim(self) -> int:
        return self.actor.output_dim

    @property
    def action_center(self) -> RealVector:
        return (np.asarray(self.action_high) + np.asarray(self.action_low)) / 2.0

    @property
    def action_scale(self) -> RealVector:
        return (np.asarray(self.action_high) - np.asarray(self.action_low)) / 2.0

    def replace(self, **changes: object) -> "AgentParams":
        return replace(self, **changes)  # type: ignore[arg-type]

    def bit_equal(self, other: "AgentParams") -> bool:
        return (
            self.step == other.step
            and self.action_low == other.action_low
            and self.action_high == other.action_high
            and self.critic.bit_equal(other.critic)
            and self.actor.bit_equal(other.actor)
            and self.critic_target.bit_equal(other.critic_target)
            and self.actor_target.bit_equal(other.actor_target)
        )


def init_agent(
    env: EnvSpec,
    rng: np.random.Generator,
    hidden_dim: int = HIDDEN_DIM,
    hidden_layers: int = HIDDEN_LAYERS,
) -> AgentParams:
    """Fresh networks for ``env``; targets start equal to the online networks."""
    critic = init_mlp(mlp_layer_sizes(env.obs_dim + env.act_dim, 1, hidden_dim, hidden_layers), rng)
    actor = init_mlp(mlp_layer_sizes(env.obs_dim, env.act_dim, hidden_dim, hidden_layers), rng)
    return AgentParams(critic, actor, critic, actor, env.action_low, env.action_high)


def actor_trace(
    params: AgentParams, actor: MlpParams, states: RealMatrix
) -> tuple[RealMatrix, MlpTrace, RealMatrix]:
    """Squashed actions with the forward trace and the raw ``tanh`` output."""
    trace = forward_trace(actor, states)
    squashed = np.tanh(trace.activations[-1])
    return params.action_center + params.action_scale * squashed, trace, squashed


def policy_actions(params: AgentParams, states: RealMatrix, target: bool = False) -> RealMatrix:
    """Actions of the online (or target) actor, always inside the action bounds."""
    actor = params.actor_target if target else params.actor
    return actor_trace(params, actor, np.atleast_2d(states))[0]


def q_values(critic: MlpParams, states: RealMatrix, actions: RealMatrix) -> RealVector:
    """``Q(s, a)`` for every row pair."""
    return np.asarray(mlp_forward(critic, np.concatenate([states, actions], axis=1)))[:, 0]
