"""Vertical-segment TSP with neighborhoods: generators, exact oracle, baselines and the PTAS."""

from ._tspn import *  # noqa: F401,F403
from ._tspn import __doc__  # noqa: F401
