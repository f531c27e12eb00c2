"""Pytest configuration and shared test utilities for redor tests."""

from collections.abc import Sequence

import numpy as np
import pytest

from redor.agent.config import TrainConfig
from redor.core.formatter import Formatter
from redor.envdata.dataset import OfflineDataset, generate_dataset
from redor.envdata.envs import make_env
from redor.selector.gradients import GradientTable


class CustomFormatter(Formatter):
    """A formatter for testing that captures messages and tables."""

    def __init__(self):
        self.status_messages: list[str] = []
        self.tables: list[tuple[str, list[str], list[list[object]]]] = []

    def print_status(self, message: str) -> None:
        self.status_messages.append(message)

    def print_error(self, message: str) -> None:
        self.status_messages.append(f"ERROR: {message}")

    def print_warning(self, message: str) -> None:
        self.status_messages.append(f"WARNING: {message}")

    def print_table(
        self, title: str, columns: Sequence[str], rows: Sequence[Sequence[object]]
    ) -> None:
        self.tables.append((title, list(columns), [list(r) for r in rows]))


def tiny_train_config(**overrides) -> TrainConfig:
    """Small networks and short runs so training tests finish in seconds."""
    values = dict(
        hidden_dim=8,
        hidden_layers=1,
        batch_size=16,
        gradient_steps=20,
        pretrain_steps=20,
        eval_every=10,
    )
    values.update(overrides)
    return TrainConfig(**values)


def tiny_dataset(
    seed: int = 0, expert: int = 3, random: int = 3, horizon: int = 8, gamma: float = 0.99
) -> OfflineDataset:
    env = make_env("point-mass", horizon=horizon).spec
    mix = [("expert", expert, 0.1), ("random", random, 0.0)]
    return generate_dataset(env, mix, seed, gamma)


def gaussian_table(seed: int, candidates: int = 6, dim: int = 5) -> GradientTable:
    """Random gradient rows whose full gradient is their mean."""
    grads = np.random.default_rng(seed).normal(size=(candidates, dim))
    return GradientTable.from_columns(grads, grads.mean(axis=0))


@pytest.fixture
def custom_formatter():
    """Fixture that provides a CustomFormatter instance."""
    return CustomFormatter()
