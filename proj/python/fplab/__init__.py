"""Numerical laboratory for low-degree and Franz-Parisi hardness criteria."""

from fplab._core import *  # noqa: F401,F403
from fplab._core import __doc__  # noqa: F401
