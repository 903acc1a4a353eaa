"""Simulation and pathwise analysis of SDEs driven by fractional and standard Brownian motion."""

from ._backend import NAME as backend

__version__ = "0.1.0"

__all__ = ["backend", "__version__"]
