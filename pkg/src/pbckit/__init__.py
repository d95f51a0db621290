"""Tools for compiling Clifford+T circuits into Pauli-based computations."""

__version__ = "0.1.0"

from . import circuits, engine, gadgets, gf2, greedy, pauli  # noqa: F401
