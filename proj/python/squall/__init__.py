"""Singular quasilinear elliptic systems: solves, barriers, fixed-point box iteration."""

from ._core import *  # noqa: F401,F403
from ._core import __version__  # noqa: F401
