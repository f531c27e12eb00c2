"""Version information for the redor package."""

__version__ = "0.1.0"
