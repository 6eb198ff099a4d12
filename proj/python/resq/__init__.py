"""Trace-driven multi-operator bandwidth-reservation decision engine."""

from ._resq import *  # noqa: F401,F403
from ._resq import __version__  # noqa: F401
