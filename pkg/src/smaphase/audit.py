"""Finite-difference audit of the analytic energy gradient."""

from __future__ import annotations

import numpy as np

from .material import ThermalState, default_params
from .objective import BulkEnergyProblem, Domain1D, Domain2D, LoadCase


def central_difference(fun, x, h=1e-7) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    g = np.empty_like(x)
    for k in range(x.size):
        step = np.zeros_like(x)
        step[k] = h
        g[k] = (fun(x + step) - fun(x - step)) / (2.0 * h)
    return g


def relative_error(analytic, reference) -> float:
    """Max-norm error relative to the max norm of the reference."""
    scale = np.max(np.abs(reference))
    err = np.max(np.abs(analytic - reference))
    return float(err / scale) if scale > 0 else float(err)


def audit_problem(dims: int, order: int, load: float | None = None) -> BulkEnergyProblem:
    p = default_params()
    thermal = ThermalState.at(210.0, p)
    if dims == 1:
        return BulkEnergyProblem(Domain1D(0.0, 1.0, order), 500.0 if load is None else load,
                                 thermal, p)
    f = 3000.0 if load is None else load
    return BulkEnergyProblem(Domain2D(order=order), LoadCase(f, f), thermal, p)


def gradient_audit(dims: int, order: int, n_fields: int = 50, seed: int = 0,
                   h: float = 1e-7, amplitude: float = 0.05) -> list[float]:
    """Relative gradient error for ``n_fields`` seeded random interior fields."""
    problem = audit_problem(dims, order)
    rng = np.random.default_rng(seed)
    errors = []
    for _ in range(n_fields):
        x = rng.uniform(-amplitude, amplitude, problem.n_unknowns)
        errors.append(relative_error(problem.gradient(x), central_difference(problem.energy, x, h)))
    return errors
