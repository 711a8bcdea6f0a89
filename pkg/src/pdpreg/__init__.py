"""Poisson-Dirichlet covariate clustering with spike-and-slab spline
regression for high-dimensional Gaussian and censored survival outcomes."""

from .rng import RandomSource
from .pdp import PdpParams, Partition

__all__ = ["RandomSource", "PdpParams", "Partition"]
__version__ = "0.1.0"
