"""Numerical laboratory for a clamped beam with localized structural damping.

The beam is split at an interface: the left segment is undamped, the right
segment carries structural damping. This package discretizes the first-order
generator of the coupled system, computes its spectrum against an exact
transcendental oracle, measures resolvent norms along the imaginary axis,
and integrates the evolution with exact discrete energy accounting.
"""

from .config import (
    BeamGeometry,
    ConfigError,
    RunConfig,
    default_config,
    parse_config,
    serialize_config,
)
from .grids import SubdomainGrid, build_grid
from .operator import (
    DiscreteOperator,
    assemble_generator,
    discrete_h_norm,
    dissipation_functional,
)
from .states import StateVector, check_domain_membership

__all__ = [
    "BeamGeometry",
    "ConfigError",
    "RunConfig",
    "default_config",
    "parse_config",
    "serialize_config",
    "SubdomainGrid",
    "build_grid",
    "DiscreteOperator",
    "assemble_generator",
    "discrete_h_norm",
    "dissipation_functional",
    "StateVector",
    "check_domain_membership",
]

__version__ = "0.1.0"
