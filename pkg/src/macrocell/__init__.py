"""Macro-compiler and container for partitioned, WCET-bounded adaptation code."""

__version__ = "0.1.0"
