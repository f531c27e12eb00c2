"""TD3+BC actor-critic: losses, weighted-subset training, evaluation and checkpoints."""

from redor.agent.checkpoints import (
    CheckpointStore,
    checkpoint_schedule,
    read_checkpoint,
    read_checkpoint_store,
    write_checkpoint,
    write_checkpoint_store,
)
from redor.agent.config import TrainConfig
from redor.agent.losses import (
    LossGrad,
    actor_loss_grad,
    mc_critic_loss_grad,
    regression_loss_grad,
    td_critic_loss_grad,
    td_targets,
)
from redor.agent.params import AgentParams, init_agent, policy_actions, q_values
from redor.agent.trainer import (
    Adam,
    EvalStats,
    TrainingLog,
    evaluate,
    normalize_weights,
    soft_update,
    train,
)

__all__ = [
    "Adam",
    "AgentParams",
    "CheckpointStore",
    "EvalStats",
    "LossGrad",
    "TrainConfig",
    "TrainingLog",
    "actor_loss_grad",
    "checkpoint_schedule",
    "evaluate",
    "init_agent",
    "mc_critic_loss_grad",
    "normalize_weights",
    "policy_actions",
    "q_values",
    "read_checkpoint",
    "read_checkpoint_store",
    "regression_loss_grad",
    "soft_update",
    "td_critic_loss_grad",
    "td_targets",
    "train",
    "write_checkpoint",
    "write_checkpoint_store",
]
