"""Actor-critic training configuration section."""

from pydantic import BaseModel, Field

from redor.core.config_builder import add_config


class TrainConfig(BaseModel):
    """TD3+BC hyper-parameters."""

    critic_lr: float = Field(default=3e-4, gt=0.0, description="Critic learning rate")
    actor_lr: float = Field(default=3e-4, gt=0.0, description="Actor learning rate")
    batch_size: int = Field(default=256, ge=1, description="Transitions per gradient step")
    gamma: float = Field(default=0.99, gt=0.0, le=1.0, description="TD discount factor")
    tau: float = Field(default=5e-3, gt=0.0, le=1.0, description="Target averaging rate")
    policy_noise: float = Field(default=0.2, ge=0.0, description="Target policy noise std")
    noise_clip: float = Field(default=0.5, ge=0.0, description="Target policy noise clip")
    kappa: float = Field(default=2.5, gt=0.0, description="TD3+BC alpha normaliser")
    policy_delay: int = Field(default=2, ge=1, description="Critic steps per actor step")
    gradient_steps: int = Field(default=20000, ge=1, description="Gradient steps G")
    pretrain_steps: int = Field(default=20000, ge=1, description="Checkpoint pretraining steps")
    eval_every: int = Field(default=5000, ge=1, description="Steps between evaluations")
    hidden_dim: int = Field(default=256, ge=1, description="Hidden layer width")
    hidden_layers: int = Field(default=2, ge=0, description="Number of hidden layers")


add_config("train", TrainConfig)
