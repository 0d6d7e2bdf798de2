"""Toolkit for mixed-mode oscillations, canards, and three-timescale reductions."""

__version__ = "0.1.0"
