"""Command-line entry points for redor."""
