"""Phase-field variational implicit-solvent model with the Coulomb-field approximation."""
from .energy import EnergyBreakdown, total_energy, variational_derivative
from .grid import Grid
from .params import PhysicalParams, RunConfig, SoluteSpec, load_config, preset, validate
from .radial import radial_flow, sharp_oracle

__version__ = "0.1.0"

__all__ = [
    "EnergyBreakdown",
    "Grid",
    "PhysicalParams",
    "RunConfig",
    "SoluteSpec",
    "load_config",
    "preset",
    "radial_flow",
    "sharp_oracle",
    "total_energy",
    "validate",
    "__version__",
]
