"""Multi-modal tracking adapters (C++ core)."""

from ._vmda import *  # noqa: F401,F403
from ._vmda import ArgumentError, StateError, InvariantError  # noqa: F401

__version__ = "0.1.0"
