"""Concept-layer training, rule learning and rule evaluation (C++ core)."""

from ._nesyvit import *  # noqa: F401,F403
from ._nesyvit import __doc__  # noqa: F401

__version__ = "0.1.0"
