"""Stochastic branching / Anderson-model simulation lab.

The heavy lifting lives in the C++ extension module; this package re-exports
its public surface.
"""

from ._core import *  # noqa: F401,F403
from ._core import __version__  # noqa: F401
