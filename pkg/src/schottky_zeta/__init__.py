"""Resonances of Schottky surfaces from transfer-operator discretizations."""

__version__ = "0.1.0"
