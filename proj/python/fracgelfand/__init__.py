"""Discrete fractional p-Laplacian Gelfand problem: solver, branch tracing and thresholds."""

from ._fracgelfand import *  # noqa: F401,F403
from ._fracgelfand import __version__  # noqa: F401
