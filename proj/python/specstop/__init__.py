"""Spectral cut-off regularisation with discrepancy-type stopping rules for
repeated noisy measurements (C++ core, Python bindings)."""

from ._core import *  # noqa: F401,F403
from ._core import __doc__  # noqa: F401

__version__ = "0.1.0"
