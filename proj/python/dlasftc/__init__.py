"""Distributed learning with automated stepsizes and finite-time exact
ratio consensus on directed graphs."""

from ._core import *  # noqa: F401,F403
from ._core import __version__  # noqa: F401
