"""Weighted-subset TD3+BC training and policy evaluation."""

from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from redor.agent.checkpoints import CheckpointStore, checkpoint_schedule
from redor.agent.config import TrainConfig
from redor.agent.losses import actor_loss_grad, td_critic_loss_grad
from redor.agent.params import AgentParams, init_agent
from redor.core.formatter import Formatter
from redor.core.redor_error import DimensionMismatchError, RedorError
from redor.core.utils import config_section
from redor.envdata.dataset import OfflineDataset
from redor.envdata.envs import EnvSpec, env_for_spec
from redor.numcore.linalg import RealVector
from redor.numcore.mlp import MlpParams, mlp_forward


@dataclass
class Adam:
    """Adam over a flat parameter vector."""

    lr: float
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    m: RealVector | None = None
    v: RealVector | None = None
    t: int = 0

    def step(self, params: RealVector, grad: RealVector) -> RealVector:
        if self.m is None or self.v is None:
            self.m = np.zeros_like(params)
            self.v = np.zeros_like(params)
        self.t += 1
        self.m = self.beta1 * self.m + (1.0 - self.beta1) * grad
        self.v = self.beta2 * self.v + (1.0 - self.beta2) * grad * grad
        m_hat = self.m / (1.0 - self.beta1**self.t)
        v_hat = self.v / (1.0 - self.beta2**self.t)
        result: RealVector = params - self.lr * m_hat / (np.sqrt(v_hat) + self.eps)
        return result


def soft_update(online: MlpParams, target: MlpParams, tau: float) -> MlpParams:
    """``tau * online + (1 - tau) * target``, elementwise."""
    if online.layer_sizes != target.layer_sizes:
        raise DimensionMismatchError("online and target networks differ in shape")
    mixed = tau * online.flatten() + (1.0 - tau) * target.flatten()
    return MlpParams.unflatten(online.layer_sizes, mixed)


def normalize_weights(
    ids: Sequence[int], weights: Sequence[float] | np.ndarray | None
) -> tuple[list[int], RealVector]:
    """Drop zero-weight trajectories and rescale the rest to mean 1.

    Raises:
        RedorError: Negative or non-finite weights, a length mismatch, or no
            positive weight left.
    """
    ids = list(ids)
    if weights is None:
        kept, values = ids, np.ones(len(ids))
    else:
        w = np.asarray(weights, dtype=np.float64)
        if w.shape != (len(ids),):
            raise DimensionMismatchError(f"{w.size} weights given for {len(ids)} trajectories")
        if not np.all(np.isfinite(w)) or np.any(w < 0.0):
            raise RedorError("trajectory weights must be finite and nonnegative")
        mask = w > 0.0
        kept = [i for i, keep in zip(ids, mask) if keep]
        values = w[mask]
    if not kept:
        raise RedorError("the dataset view is empty: no trajectory has positive weight")
    if np.all(values == values[0]):
        return kept, np.ones(len(kept))
    return kept, values / values.mean()


@dataclass
class TrainingLog:
    """Per-step losses plus evaluation results recorded during `train`."""

    critic_losses: list[float] = field(default_factory=list)
    actor_losses: list[float] = field(default_factory=list)
    actor_steps: list[int] = field(default_factory=list)
    alpha_fallbacks: int = 0
    checkpoint_steps: list[int] = field(default_factory=list)
    evaluations: list[tuple[int, float, float]] = field(default_factory=list)


StepCallback = Callable[[int, AgentParams, TrainingLog], None]


def train(
    dataset: OfflineDataset,
    cfg: TrainConfig | None = None,
    seed: int = 0,
    ids: Sequence[int] | None = None,
    weights: Sequence[float] | np.ndarray | None = None,
    gradient_steps: int | None = None,
    checkpoints_out: CheckpointStore | None = None,
    checkpoint_rounds: int = 1,
    callback: StepCallback | None = None,
    callback_every: int | None = None,
    formatter: Formatter | None = None,
) -> tuple[AgentParams, TrainingLog]:
    """Train TD3+BC on the weighted trajectories ``ids`` of ``dataset``.

    Transitions are sampled uniformly from the kept trajectories and each
    per-sample loss is multiplied by its trajectory's weight (mean-1 rescaled).
    The actor and both targets are updated every ``cfg.policy_delay`` critic
    steps.

    Args:
        dataset: Source dataset.
        cfg: Hyper-parameters; defaults to the ``train`` config section.
        seed: Seed of the single generator driving init, sampling and noise.
        ids: Trajectory ids to train on (default: all).
        weights: One nonnegative weight per id (default: uniform).
        gradient_steps: Overrides ``cfg.gradient_steps``.
        checkpoints_out: When given, receives ``checkpoint_rounds`` snapshots
            at steps ``ceil(G * t / T)``.
        checkpoint_rounds: Number of snapshots ``T``.
        callback: Called as ``callback(step, params, log)`` every
            ``callback_every`` steps and after the final step.
        callback_every: Defaults to ``cfg.eval_every``.
        formatter: Receives progress messages.

    Returns:
        The final parameters and the training log.
    """
    if cfg is None:
        section = config_section("train")
        cfg = section if section is not None else TrainConfig()
    steps = gradient_steps if gradient_steps is not None else cfg.gradient_steps
    if steps < 1:
        raise RedorError(f"gradient_steps must be >= 1, got {steps}")
    every = callback_every if callback_every is not None else cfg.eval_every
    chosen = dataset.check_ids(range(len(dataset)) if ids is None else ids)
    kept, scaled = normalize_weights(chosen, weights)

    rng = np.random.default_rng(seed)
    params = init_agent(dataset.env, rng, cfg.hidden_dim, cfg.hidden_layers)
    pool = dataset.transition_batch(kept, scaled)
    critic_opt, actor_opt = Adam(cfg.critic_lr), Adam(cfg.actor_lr)
    schedule = checkpoint_schedule(steps, checkpoint_rounds) if checkpoints_out is not None else {}
    log = TrainingLog()
    report_every = max(steps // 10, 1)

    for step in range(1, steps + 1):
        batch = pool.take(rng.integers(0, len(pool), size=cfg.batch_size))
        critic = td_critic_loss_grad(params, batch, cfg, rng)
        critic_params = MlpParams.unflatten(
            params.critic.layer_sizes, critic_opt.step(params.critic.flatten(), critic.grad)
        )
        params = params.replace(critic=critic_params, step=step)
        log.critic_losses.append(critic.loss)

        if step % cfg.policy_delay == 0:
            actor = actor_loss_grad(params, batch, cfg)
            actor_params = MlpParams.unflatten(
                params.actor.layer_sizes, actor_opt.step(params.actor.flatten(), actor.grad)
            )
            params = params.replace(
                actor=actor_params,
                critic_target=soft_update(params.critic, params.critic_target, cfg.tau),
                actor_target=soft_update(actor_params, params.actor_target, cfg.tau),
            )
            log.actor_losses.append(actor.loss)
            log.actor_steps.append(step)
            log.alpha_fallbacks += int(actor.alpha_fallback)

        if checkpoints_out is not None:
            for round_index in schedule.get(step, []):
                checkpoints_out.put(round_index, step, params)
                log.checkpoint_steps.append(step)
        if callback is not None and (step % every == 0 or step == steps):
            callback(step, params, log)
        if formatter is not None and step % report_every == 0:
            formatter.print_status(
                f"step {step}/{steps}  critic loss {critic.loss:.4g}"
                + (f"  actor loss {log.actor_losses[-1]:.4g}" if log.actor_losses else "")
            )
    return params, log


class EvalStats(NamedTuple):
    mean: float
    std: float


def evaluate(
    actor: AgentParams | MlpParams,
    env: EnvSpec,
    episodes: int,
    seed: int,
    at_goal: bool = False,
) -> EvalStats:
    """Mean and (population) std of undiscounted episode returns.

    Episode ``i`` draws its start state from a generator seeded with
    ``(seed, i)``, so results do not depend on evaluation order.
    """
    if episodes < 1:
        raise RedorError(f"episodes must be >= 1, got {episodes}")
    network = actor.actor if isinstance(actor, AgentParams) else actor
    if network.input_dim != env.obs_dim or network.output_dim != env.act_dim:
        raise DimensionMismatchError(
            f"actor {network.input_dim}->{network.output_dim} does not fit env "
            f"{env.obs_dim}->{env.act_dim}"
        )
    dynamics = env_for_spec(env)
    center, scale = (env.high + env.low) / 2.0, (env.high - env.low) / 2.0
    returns = np.zeros(episodes)
    for episode in range(episodes):
        state = dynamics.reset(np.random.default_rng([seed, episode]), at_goal=at_goal)
        for _ in range(env.horizon):
            action = center + scale * np.tanh(mlp_forward(network, state))
            state, reward = dynamics.step(state, action)
            returns[episode] += reward
    return EvalStats(float(returns.mean()), float(returns.std()))
