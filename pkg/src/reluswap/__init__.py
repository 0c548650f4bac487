"""Rewrite ReLU networks into approximately equivalent networks over other activations."""
from reluswap.kernels import BACKEND

__version__ = "0.1.0"
__all__ = ["BACKEND", "__version__"]
