"""Environment and dataset-generation configuration section."""

from pydantic import BaseModel, Field, field_validator

from redor.core.config_builder import add_config
from redor.envdata.envs import ENVIRONMENTS
from redor.envdata.policies import PolicyMixEntry

HARD_RANDOM_FACTOR = 3


class EnvConfig(BaseModel):
    """Environment choice and behaviour-policy mix for `generate`."""

    name: str = Field(default="point-mass", description="Environment name")
    horizon: int = Field(default=50, ge=1, description="Episode length H")
    r_max: float = Field(default=1.0, gt=0.0, description="Reward upper bound R_max")
    gamma: float = Field(default=0.99, gt=0.0, le=1.0, description="Discount factor")
    expert: int = Field(default=50, ge=0, description="Number of expert trajectories")
    medium: int = Field(default=0, ge=0, description="Number of medium trajectories")
    random: int = Field(default=50, ge=0, description="Number of random trajectories")
    expert_noise: float = Field(default=0.1, ge=0.0, description="Expert action noise std")
    medium_noise: float = Field(default=0.1, ge=0.0, description="Medium action noise std")
    hard: bool = Field(default=False, description="Triple the random-trajectory count")
    eval_episodes: int = Field(default=10, ge=1, description="Episodes per evaluation point")

    @field_validator("name")
    @classmethod
    def _registered(cls, name: str) -> str:
        if name not in ENVIRONMENTS:
            raise ValueError(f"unknown environment '{name}'; valid: {', '.join(ENVIRONMENTS)}")
        return name

    def policy_mix(self) -> tuple[PolicyMixEntry, ...]:
        """Behaviour-policy mix; the hard variant triples the random trajectories."""
        random_count = self.random * (HARD_RANDOM_FACTOR if self.hard else 1)
        return (
            PolicyMixEntry("expert", self.expert, self.expert_noise),
            PolicyMixEntry("medium", self.medium, self.medium_noise),
            PolicyMixEntry("random", random_count, 0.0),
        )


add_config("env", EnvConfig)
