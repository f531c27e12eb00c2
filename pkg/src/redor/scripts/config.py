"""Configuration section for ``redor compare`` and shared output locations."""

from pydantic import BaseModel, Field, field_validator

from redor.core.config_builder import add_config
from redor.selector.baselines import BASELINES

METHODS = ("redor", *BASELINES)


class CompareConfig(BaseModel):
    """Methods, seeds and outputs of a comparison run."""

    methods: list[str] = Field(
        default_factory=lambda: ["redor", "random", "prioritized", "full"],
        description="Selection methods to compare",
    )
    seeds: list[int] = Field(default_factory=lambda: [0], description="Training seeds")
    out_dir: str = Field(default=".", description="Directory receiving every output file")
    default_fraction: float = Field(
        default=0.2,
        gt=0.0,
        le=1.0,
        description="Baseline subset fraction when no redor selection fixes the size",
    )
    record_wall_time: bool = Field(
        default=True, description="Record selection wall time (0.0 keeps outputs reproducible)"
    )

    @field_validator("methods")
    @classmethod
    def _known_methods(cls, methods: list[str]) -> list[str]:
        unknown = [m for m in methods if m not in METHODS]
        if unknown:
            raise ValueError(f"unknown methods {unknown}; valid: {', '.join(METHODS)}")
        if not methods:
            raise ValueError("at least one method is required")
        return methods

    @field_validator("seeds")
    @classmethod
    def _some_seeds(cls, seeds: list[int]) -> list[int]:
        if not seeds:
            raise ValueError("at least one seed is required")
        return seeds


add_config("compare", CompareConfig)
