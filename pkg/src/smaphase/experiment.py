"""
Experiment presets and the GA -> grid transfer -> BFGS pipeline.

Configuration is a frozen ``ExperimentSpec``. Overrides use flat dotted keys
(``ga.population=60``, ``bfgs.relaxation=0.2``, ``material.a2=480``); tuple
fields take comma-separated values (``ga.gene_range=-0.1,0.1``).
"""

from __future__ import annotations

import dataclasses
import logging
import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .bfgs import BfgsConfig, refine
from .chebyshev import cardinal_matrix, cgl_nodes, filter_pair, grid_transfer_2d
from .ga import GaConfig, evolve
from .material import MaterialParams, ThermalState, default_params
from .objective import (
    BulkEnergyProblem,
    DisplacementField,
    Domain1D,
    Domain2D,
    LoadCase,
    pack,
)

logger = logging.getLogger(__name__)


class UnknownPreset(KeyError):
    pass


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentSpec:
    name: str = "custom"
    dimensionality: int = 1
    x_left: float = 0.0
    x_right: float = 1.0
    y_bottom: float = -1.0
    y_top: float = 1.0
    fx: float = 0.0
    fy: float = 0.0
    temperature: float = 210.0
    ga_order: int = 14
    refine_order: int = 14
    ga: GaConfig = field(default_factory=GaConfig)
    bfgs: BfgsConfig = field(default_factory=BfgsConfig)
    material: MaterialParams = field(default_factory=default_params)
    output_dir: str = "out"

    def __post_init__(self):
        if self.dimensionality not in (1, 2):
            raise ConfigError(f"dimensionality must be 1 or 2, got {self.dimensionality}")
        if not self.sparse_order < self.ga_order <= self.refine_order:
            raise ConfigError(
                "need sparse_order < ga_order <= refine_order, got "
                f"{self.sparse_order}, {self.ga_order}, {self.refine_order}"
            )

    @property
    def sparse_order(self) -> int:
        return self.ga.sparse_order

    @property
    def load(self) -> LoadCase:
        return LoadCase(self.fx, self.fy if self.dimensionality == 2 else 0.0)

    @property
    def thermal(self) -> ThermalState:
        return ThermalState.at(self.temperature, self.material)

    def domain(self, order: int):
        if self.dimensionality == 1:
            return Domain1D(self.x_left, self.x_right, order)
        return Domain2D(self.x_left, self.x_right, self.y_bottom, self.y_top, order)

    def problem(self, order: int) -> BulkEnergyProblem:
        return BulkEnergyProblem(self.domain(order), self.load, self.thermal, self.material)


_PRESETS = {
    "experiment1": lambda: ExperimentSpec(
        name="experiment1",
        dimensionality=1,
        x_left=0.0,
        x_right=1.0,
        fx=500.0,
        ga_order=14,
        refine_order=14,
        ga=GaConfig(population=60, generations=800, sparse_order=6, rng_seed=42),
    ),
    "experiment2": lambda: ExperimentSpec(
        name="experiment2",
        dimensionality=2,
        x_left=-1.0,
        x_right=1.0,
        y_bottom=-1.0,
        y_top=1.0,
        fx=3000.0,
        fy=3000.0,
        ga_order=8,
        refine_order=14,
        ga=GaConfig(population=120, generations=1500, sparse_order=5, rng_seed=42),
    ),
}
_PRESETS["experiment3"] = lambda: dataclasses.replace(
    _PRESETS["experiment2"](), name="experiment3", fx=2000.0, fy=0.0
)

PRESET_NAMES = tuple(sorted(_PRESETS))


def preset(name: str) -> ExperimentSpec:
    try:
        return _PRESETS[name]()
    except KeyError:
        raise UnknownPreset(f"unknown preset {name!r}; choose from {', '.join(PRESET_NAMES)}") from None


# ---------------------------------------------------------------- config keys

_SECTIONS = ("ga", "bfgs", "material")


def flatten(spec: ExperimentSpec) -> dict:
    """Every effective parameter under its dotted key."""
    out = {}
    for f in dataclasses.fields(spec):
        value = getattr(spec, f.name)
        if f.name in _SECTIONS:
            for sub in dataclasses.fields(value):
                v = getattr(value, sub.name)
                out[f"{f.name}.{sub.name}"] = list(v) if isinstance(v, tuple) else v
        else:
            out[f.name] = value
    return out


def _coerce(text: str, current):
    text = text.strip()
    try:
        if isinstance(current, bool):
            if text.lower() in ("1", "true", "yes", "on"):
                return True
            if text.lower() in ("0", "false", "no", "off"):
                return False
            raise ValueError(text)
        if isinstance(current, int):
            return int(text)
        if isinstance(current, float):
            return float(text)
        if isinstance(current, tuple):
            parts = [float(t) for t in text.split(",")]
            if len(parts) != len(current):
                raise ValueError(text)
            return tuple(parts)
    except ValueError:
        raise ConfigError(f"cannot parse {text!r} as {type(current).__name__}") from None
    return text


def apply_overrides(spec: ExperimentSpec, overrides: dict) -> ExperimentSpec:
    top, nested = {}, {s: {} for s in _SECTIONS}
    for key, raw in overrides.items():
        section, _, name = key.partition(".")
        if name:
            if section not in _SECTIONS:
                raise ConfigError(f"unknown section in key {key!r}")
            obj = getattr(spec, section)
            if name not in {f.name for f in dataclasses.fields(obj)}:
                raise ConfigError(f"unknown key {key!r}")
            nested[section][name] = _coerce(str(raw), getattr(obj, name))
        else:
            if key not in {f.name for f in dataclasses.fields(spec)} or key in _SECTIONS:
                raise ConfigError(f"unknown key {key!r}")
            top[key] = _coerce(str(raw), getattr(spec, key))
    for section, values in nested.items():
        if values:
            try:
                top[section] = dataclasses.replace(getattr(spec, section), **values)
            except ValueError as exc:
                raise ConfigError(str(exc)) from exc
    try:
        return dataclasses.replace(spec, **top)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def parse_assignments(lines) -> dict:
    out = {}
    for lineno, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value, got {line!r}")
        key, value = line.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def load_config(path) -> ExperimentSpec:
    """
    Read a key=value file. An optional ``preset = <name>`` line picks the base
    spec; every other line overrides one field.
    """
    with open(path) as fh:
        values = parse_assignments(fh)
    base = preset(values.pop("preset")) if "preset" in values else ExperimentSpec()
    return apply_overrides(base, values)


# ---------------------------------------------------------------- pipeline

@dataclass
class RunArtifacts:
    spec: ExperimentSpec
    problem: BulkEnergyProblem
    final_x: np.ndarray
    final_field: DisplacementField
    strain_fields: object
    ga_trace: list
    bfgs_trace: list
    final_energy: float
    ga_best_energy: float
    refine_start_energy: float
    ga_field: DisplacementField
    converged: bool
    metadata: dict

    @property
    def status(self) -> str:
        return self.metadata["status"]


def transfer(x, src: BulkEnergyProblem, dst: BulkEnergyProblem) -> np.ndarray:
    """Carry a packed GA solution to the refinement grid by Chebyshev interpolation."""
    m_from, m_to = src.dom.order, dst.dom.order
    field_ = src.unpack(x)
    if m_from == m_to:
        return np.array(x, dtype=float)
    if src.dims == 1:
        T = cardinal_matrix(cgl_nodes(m_from), cgl_nodes(m_to))
        return pack(DisplacementField(T @ field_.u1))
    return pack(DisplacementField(
        grid_transfer_2d(field_.u1, m_from, m_to),
        grid_transfer_2d(field_.u2, m_from, m_to),
    ))


def run(spec: ExperimentSpec, seed: Optional[int] = None) -> RunArtifacts:
    if seed is not None:
        spec = dataclasses.replace(spec, ga=dataclasses.replace(spec.ga, rng_seed=int(seed)))
    ga_problem = spec.problem(spec.ga_order)
    fine_problem = spec.problem(spec.refine_order)
    filt = filter_pair(spec.ga_order + 1, spec.sparse_order + 1)

    t0 = time.perf_counter()
    ga_result = evolve(ga_problem, spec.ga, filt)
    t1 = time.perf_counter()
    logger.info("GA: %d generations, best energy %.6g (%.1fs)",
                spec.ga.generations, ga_result.best.fitness, t1 - t0)

    x0 = transfer(ga_result.best.genes, ga_problem, fine_problem)
    ref = refine(fine_problem, x0, spec.bfgs)
    t2 = time.perf_counter()
    logger.info("BFGS: %d iterations, energy %.6g, converged=%s (%.1fs)",
                ref.iterations, ref.energy, ref.converged, t2 - t1)

    if spec.bfgs.max_iterations == 0:
        status = "refinement_skipped"
    else:
        status = "converged" if ref.converged else "not_converged"
    metadata = {
        "status": status,
        "seed": spec.ga.rng_seed,
        "unknowns_ga": ga_problem.n_unknowns,
        "unknowns_refine": fine_problem.n_unknowns,
        "bfgs_iterations": ref.iterations,
        "bfgs_halvings": ref.halvings,
        "bfgs_resets": ref.resets,
        "ga_best_energy": ga_result.best.fitness,
        "refine_start_energy": ref.energies[0],
        "final_energy": ref.energy,
        "config": flatten(spec),
    }
    return RunArtifacts(
        spec=spec,
        problem=fine_problem,
        final_x=ref.x,
        final_field=fine_problem.unpack(ref.x),
        strain_fields=fine_problem.strains(ref.x),
        ga_trace=list(ga_result.trace),
        bfgs_trace=list(ref.step_norms),
        final_energy=float(ref.energy),
        ga_best_energy=float(ga_result.best.fitness),
        refine_start_energy=float(ref.energies[0]),
        ga_field=ga_problem.unpack(ga_result.best.genes),
        converged=ref.converged,
        metadata=metadata,
    )
