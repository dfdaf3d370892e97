"""Reconstructing graphs from boundary travel times, classically and with a
simulated Grover search."""

__version__ = "0.1.0"
