"""Inference on errorfully observed stochastic blockmodel graphs."""

__version__ = "0.1.0"
