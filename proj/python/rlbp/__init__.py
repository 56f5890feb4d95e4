"""Trace-driven branch-prediction laboratory.

The compiled extension carries the full API; this package only re-exports it.
"""

from ._core import *  # noqa: F401,F403
from ._core import __version__  # noqa: F401
