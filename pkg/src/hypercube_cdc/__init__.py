"""Hypercube-design coded distributed computing.

Build a placement, run map, shuffle and reduce, and compare measured
computation and communication loads with the closed forms.
"""

from .analysis import corollary1, optimal_cascaded, sweep, theorem1, theorem2, uncoded
from .design import Placement, build_placement, min_requirements
from .errors import ConfigError, HypercubeError
from .lattice import HypercubeParams, SMode
from .mapper import MapPolicy
from .pipeline import SimulationResult, chain_round, simulate

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "HypercubeError",
    "HypercubeParams",
    "MapPolicy",
    "Placement",
    "SMode",
    "SimulationResult",
    "build_placement",
    "chain_round",
    "corollary1",
    "min_requirements",
    "optimal_cascaded",
    "simulate",
    "sweep",
    "theorem1",
    "theorem2",
    "uncoded",
]
