"""Simulation and analysis toolkit for pulsed coherent control of a
magnetically split quantum-dot trion (double-Lambda system)."""

__version__ = "0.1.0"
