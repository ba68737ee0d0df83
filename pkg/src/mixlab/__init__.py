"""Exact-computation laboratory for finite Markov chain mixing."""

__version__ = "0.1.0"
