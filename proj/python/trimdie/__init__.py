"""Trimming-die design inspection: synthetic CAD domain, detection math,
pixel-to-mm metrology and the zigzag inspection pipeline."""

from trimdie._core import *  # noqa: F401,F403
from trimdie._core import __version__  # noqa: F401
