"""Two-species aggregation with quadratic cross-diffusion in one dimension."""

__version__ = "0.1.0"
