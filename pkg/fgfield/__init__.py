"""fgfield: simulation and verification of fractional Gaussian fields."""

__version__ = "0.1.0"
