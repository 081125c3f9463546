"""Qubit networks longitudinally coupled to a hot multimode transmission line."""

__version__ = "0.1.0"
