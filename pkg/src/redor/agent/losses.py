"""TD3+BC losses with analytic gradients.

Every loss is a weighted batch mean ``mean_i(w_i * l_i)`` using the
``weights`` column of the batch, so all-ones weights give the plain mean.
"""

from dataclasses import dataclass

import numpy as np

from redor.agent.config import TrainConfig
from redor.agent.params import AgentParams, actor_trace, q_values
from redor.core.redor_error import RedorError
from redor.core.utils import config_section
from redor.envdata.dataset import TransitionBatch
from redor.numcore.linalg import RealVector
from redor.numcore.mlp import MlpParams, backward_trace, forward_trace


@dataclass(frozen=True)
class LossGrad:
    """A loss value with its flattened parameter gradient.

    ``alpha`` is only set by the actor loss; ``alpha_fallback`` records that the
    batch had ``mean|Q| == 0`` and alpha was replaced by 1.
    """

    loss: float
    grad: RealVector
    alpha: float | None = None
    alpha_fallback: bool = False


def _require_batch(batch: TransitionBatch) -> None:
    if len(batch) == 0:
        raise RedorError("loss requested on an empty batch")


def _train_config(cfg: TrainConfig | None) -> TrainConfig:
    if cfg is not None:
        return cfg
    section = config_section("train")
    return section if section is not None else TrainConfig()


def td_targets(
    params: AgentParams,
    batch: TransitionBatch,
    cfg: TrainConfig | None = None,
    rng: np.random.Generator | None = None,
) -> RealVector:
    """``r + gamma * Q'(s', pi'(s') + eps)`` with clipped noise; no noise when ``rng`` is None."""
    cfg = _train_config(cfg)
    next_actions = actor_trace(params, params.actor_target, batch.next_states)[0]
    if rng is not None and cfg.policy_noise > 0.0:
        noise = rng.normal(0.0, cfg.policy_noise, size=next_actions.shape)
        noise = np.clip(noise, -cfg.noise_clip, cfg.noise_clip) * params.action_scale
        next_actions = np.clip(
            next_actions + noise, np.asarray(params.action_low), np.asarray(params.action_high)
        )
    next_q = q_values(params.critic_target, batch.next_states, next_actions)
    return batch.rewards + cfg.gamma * (1.0 - batch.terminals.astype(np.float64)) * next_q


def regression_loss_grad(
    critic: MlpParams, batch: TransitionBatch, targets: RealVector
) -> LossGrad:
    """Weighted mean of ``(Q(s, a) - y)^2`` and its gradient over the critic."""
    _require_batch(batch)
    trace = forward_trace(critic, np.concatenate([batch.states, batch.actions], axis=1))
    residual = trace.activations[-1][:, 0] - targets
    weights = batch.weights
    loss = float(np.mean(weights * residual**2))
    output_grad = (2.0 * weights * residual / len(batch))[:, None]
    grad, _ = backward_trace(critic, trace, output_grad)
    return LossGrad(loss, grad)


def td_critic_loss_grad(
    params: AgentParams,
    batch: TransitionBatch,
    cfg: TrainConfig | None = None,
    rng: np.random.Generator | None = None,
) -> LossGrad:
    """Squared TD error against frozen targets; ``rng`` drives the target policy noise."""
    _require_batch(batch)
    return regression_loss_grad(params.critic, batch, td_targets(params, batch, cfg, rng))


def mc_critic_loss_grad(params: AgentParams, batch: TransitionBatch) -> LossGrad:
    """Squared error against the empirical returns-to-go stored in the batch."""
    _require_batch(batch)
    return regression_loss_grad(params.critic, batch, batch.returns_to_go)


def actor_loss_grad(
    params: AgentParams, batch: TransitionBatch, cfg: TrainConfig | None = None
) -> LossGrad:
    """TD3+BC actor loss ``-Q(s, pi(s)) / alpha + ||pi(s) - a||^2``.

    ``alpha = mean|Q(s, a)| / kappa`` over the batch's dataset actions and is
    treated as a constant.
    """
    _require_batch(batch)
    cfg = _train_config(cfg)
    n = len(batch)
    weights = batch.weights
    alpha = float(np.mean(np.abs(q_values(params.critic, batch.states, batch.actions)))) / cfg.kappa
    fallback = alpha == 0.0
    if fallback:
        alpha = 1.0

    actions, trace, squashed = actor_trace(params, params.actor, batch.states)
    critic_trace = forward_trace(params.critic, np.concatenate([batch.states, actions], axis=1))
    q_pi = critic_trace.activations[-1][:, 0]
    diff = actions - batch.actions
    loss = float(np.mean(weights * (-q_pi / alpha + np.sum(diff * diff, axis=1))))

    _, input_grad = backward_trace(params.critic, critic_trace, (-weights / (alpha * n))[:, None])
    action_grad = input_grad[:, params.obs_dim :] + 2.0 * weights[:, None] * diff / n
    raw_grad = action_grad * params.action_scale * (1.0 - squashed**2)
    grad, _ = backward_trace(params.actor, trace, raw_grad)
    return LossGrad(loss, grad, alpha, fallback)
