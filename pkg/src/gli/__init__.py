"""Multivariate graph-limit models for aligned multiplex graphs."""

__version__ = "0.1.0"
