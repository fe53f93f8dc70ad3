"""Cognitive radio disaster-response network simulator."""

__version__ = "1.0.0"
