"""Worst-case aware neural network training for DC optimal power flow."""

__version__ = "0.1.0"
