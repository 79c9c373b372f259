"""Multiplexing-gain simulator for dense RRH systems with aggressive pilot reuse."""

__version__ = "0.1.0"
