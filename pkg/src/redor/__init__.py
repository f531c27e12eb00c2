"""Top-level redor module: dataset reduction for offline reinforcement learning."""

from redor._version import __version__

__all__ = ["__version__"]
