"""Hybrid GA + quasi-Newton minimisation of Landau bulk energy in SMA wires and patches."""

from .material import MaterialParams, ThermalState, default_params, martensite_wells
from .experiment import ExperimentSpec, preset, run

__all__ = [
    "MaterialParams",
    "ThermalState",
    "default_params",
    "martensite_wells",
    "ExperimentSpec",
    "preset",
    "run",
]

__version__ = "0.1.0"
