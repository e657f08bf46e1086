"""Desk-scale laboratory for quasi-direct-drive quadruped locomotion."""

__version__ = "0.1.0"
