"""Tempered space-fractional Cattaneo equation: analytic solutions, transform
engines and a Monte Carlo simulator of the time-changed process."""

__version__ = "0.1.0"
