"""
Discrete bulk energy of clamped SMA wires (1D) and patches (2D).

The displacement is collocated on a CGL grid mapped linearly onto the physical
domain. Strains come from the differentiation matrix, the energy integral from
Clenshaw-Curtis weights. Every function accepts leading batch dimensions, so a
whole GA population can be evaluated in one call.

Grid layout in 2D: ``u[i, j]`` is the value at (x_i, y_j), with i indexing x.
Unknowns are the interior values of u1 in row-major order followed by those of
u2; boundary entries are always zero.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .chebyshev import SpectralOperators, spectral_operators
from .material import (
    MaterialParams,
    ThermalState,
    full_density_2d,
    landau_density,
    landau_density_derivative,
)

SQRT2 = np.sqrt(2.0)


class ShapeMismatch(ValueError):
    pass


@dataclass(frozen=True)
class Domain1D:
    x_left: float = 0.0
    x_right: float = 1.0
    order: int = 14

    def __post_init__(self):
        if not self.x_right > self.x_left:
            raise ValueError("x_right must exceed x_left")

    @property
    def length(self) -> float:
        return self.x_right - self.x_left

    @property
    def scale(self) -> float:
        """d(reference)/d(physical) = 2 / length."""
        return 2.0 / self.length

    @property
    def jacobian(self) -> float:
        return self.length / 2.0

    def coordinates(self) -> np.ndarray:
        xr = spectral_operators(self.order).nodes
        return 0.5 * (self.x_left + self.x_right) + 0.5 * self.length * xr


@dataclass(frozen=True)
class Domain2D:
    x_left: float = -1.0
    x_right: float = 1.0
    y_bottom: float = -1.0
    y_top: float = 1.0
    order: int = 8

    def __post_init__(self):
        if not (self.x_right > self.x_left and self.y_top > self.y_bottom):
            raise ValueError("domain extents must be positive")

    @property
    def scale_x(self) -> float:
        return 2.0 / (self.x_right - self.x_left)

    @property
    def scale_y(self) -> float:
        return 2.0 / (self.y_top - self.y_bottom)

    @property
    def jacobian(self) -> float:
        return (self.x_right - self.x_left) * (self.y_top - self.y_bottom) / 4.0

    @property
    def area(self) -> float:
        return 4.0 * self.jacobian

    def coordinates(self) -> tuple[np.ndarray, np.ndarray]:
        """Physical node coordinates as (X, Y) arrays indexed [i, j]."""
        r = spectral_operators(self.order).nodes
        x = 0.5 * (self.x_left + self.x_right) + 0.5 * (self.x_right - self.x_left) * r
        y = 0.5 * (self.y_bottom + self.y_top) + 0.5 * (self.y_top - self.y_bottom) * r
        return np.meshgrid(x, y, indexing="ij")

    def with_order(self, order: int) -> "Domain2D":
        return Domain2D(self.x_left, self.x_right, self.y_bottom, self.y_top, order)


@dataclass(frozen=True)
class LoadCase:
    """Uniform body force density [g/(ms²·cm²)]; ``fy`` is ignored in 1D."""
    fx: float = 0.0
    fy: float = 0.0


@dataclass
class DisplacementField:
    u1: np.ndarray
    u2: Optional[np.ndarray] = None

    @property
    def dims(self) -> int:
        return 1 if self.u2 is None else 2

    def is_clamped(self) -> bool:
        if self.u2 is None:
            return not (np.any(self.u1[..., 0]) or np.any(self.u1[..., -1]))
        for u in (self.u1, self.u2):
            edges = (u[..., 0, :], u[..., -1, :], u[..., :, 0], u[..., :, -1])
            if any(np.any(e) for e in edges):
                return False
        return True

    def __neg__(self):
        return DisplacementField(-self.u1, None if self.u2 is None else -self.u2)


@dataclass
class StrainFields:
    e1: np.ndarray
    e2: np.ndarray
    e3: np.ndarray


def _check_1d(field, dom, ops):
    if field.u2 is not None or field.u1.shape[-1] != dom.order + 1 or ops.n != dom.order:
        raise ShapeMismatch(f"1D field of shape {field.u1.shape} does not match order {dom.order}")


def _check_2d(field, dom, ops):
    shape = (dom.order + 1, dom.order + 1)
    if field.u2 is None or field.u1.shape[-2:] != shape or field.u2.shape != field.u1.shape:
        raise ShapeMismatch(f"2D field does not match order {dom.order}")
    if ops.n != dom.order:
        raise ShapeMismatch("operators built for a different order")


def strains_1d(field: DisplacementField, dom: Domain1D, ops: SpectralOperators) -> np.ndarray:
    _check_1d(field, dom, ops)
    return dom.scale * (field.u1 @ ops.diff.T)


def strains_2d(field: DisplacementField, dom: Domain2D, ops: SpectralOperators) -> StrainFields:
    _check_2d(field, dom, ops)
    D = ops.diff
    eta11 = dom.scale_x * (D @ field.u1)
    eta22 = dom.scale_y * (field.u2 @ D.T)
    eta12 = 0.5 * (dom.scale_y * (field.u1 @ D.T) + dom.scale_x * (D @ field.u2))
    return StrainFields(
        e1=(eta11 + eta22) / SQRT2,
        e2=(eta11 - eta22) / SQRT2,
        e3=eta12,
    )


def bulk_energy_1d(field, dom: Domain1D, ops, f: float, thermal: ThermalState,
                   p: MaterialParams):
    eps = strains_1d(field, dom, ops)
    dens = landau_density(eps, thermal.delta_theta, p) - f * field.u1
    return dom.jacobian * (dens @ ops.quad)


def density_2d(field, dom, ops, thermal, p) -> np.ndarray:
    s = strains_2d(field, dom, ops)
    return full_density_2d(s.e1, s.e2, s.e3, thermal.delta_theta, p)


def bulk_energy_2d(field, dom: Domain2D, ops, load: LoadCase, thermal: ThermalState,
                   p: MaterialParams):
    dens = density_2d(field, dom, ops, thermal, p) - load.fx * field.u1 - load.fy * field.u2
    w = ops.quad
    return dom.jacobian * np.einsum("...ij,i,j->...", dens, w, w)


def _grid_gradient_1d(field, dom, ops, f, thermal, p):
    eps = strains_1d(field, dom, ops)
    wj = dom.jacobian * ops.quad
    stress = wj * landau_density_derivative(eps, thermal.delta_theta, p)
    return dom.scale * (stress @ ops.diff) - f * wj


def _grid_gradient_2d(field, dom, ops, load, thermal, p):
    s = strains_2d(field, dom, ops)
    D = ops.diff
    w = ops.quad
    G = dom.jacobian * np.outer(w, w)
    r1 = p.a1 * s.e1
    r2 = landau_density_derivative(s.e2, thermal.delta_theta, p)
    # conjugates of eta11, eta22, eta12, weighted by the quadrature
    P11 = G * (r1 + r2) / SQRT2
    P22 = G * (r1 - r2) / SQRT2
    P12 = G * (p.a3 * s.e3)
    g1 = dom.scale_x * (D.T @ P11) + 0.5 * dom.scale_y * (P12 @ D) - load.fx * G
    g2 = dom.scale_y * (P22 @ D) + 0.5 * dom.scale_x * (D.T @ P12) - load.fy * G
    return g1, g2


def energy_gradient(field: DisplacementField, dom, ops, load, thermal, p) -> np.ndarray:
    """
    Gradient of the bulk energy with respect to the packed interior unknowns.

    ``load`` is a float for wires and a LoadCase for patches.
    """
    if field.dims == 1:
        _check_1d(field, dom, ops)
        f = load.fx if isinstance(load, LoadCase) else load
        g = _grid_gradient_1d(field, dom, ops, f, thermal, p)
        return pack(DisplacementField(g))
    _check_2d(field, dom, ops)
    g1, g2 = _grid_gradient_2d(field, dom, ops, load, thermal, p)
    return pack(DisplacementField(g1, g2))


def n_unknowns(dims: int, order: int) -> int:
    return (order - 1) if dims == 1 else 2 * (order - 1) ** 2


def pack(field: DisplacementField) -> np.ndarray:
    if field.u2 is None:
        return np.array(field.u1[..., 1:-1])
    batch = field.u1.shape[:-2]
    a = field.u1[..., 1:-1, 1:-1].reshape(batch + (-1,))
    b = field.u2[..., 1:-1, 1:-1].reshape(batch + (-1,))
    return np.concatenate([a, b], axis=-1)


def unpack(vec, dom) -> DisplacementField:
    vec = np.asarray(vec, dtype=float)
    n = dom.order
    dims = 1 if isinstance(dom, Domain1D) else 2
    if vec.shape[-1] != n_unknowns(dims, n):
        raise ShapeMismatch(
            f"vector of length {vec.shape[-1]} does not match {n_unknowns(dims, n)} unknowns"
        )
    batch = vec.shape[:-1]
    if dims == 1:
        u = np.zeros(batch + (n + 1,))
        u[..., 1:-1] = vec
        return DisplacementField(u)
    m = (n - 1) ** 2
    u1 = np.zeros(batch + (n + 1, n + 1))
    u2 = np.zeros_like(u1)
    u1[..., 1:-1, 1:-1] = vec[..., :m].reshape(batch + (n - 1, n - 1))
    u2[..., 1:-1, 1:-1] = vec[..., m:].reshape(batch + (n - 1, n - 1))
    return DisplacementField(u1, u2)


class BulkEnergyProblem:
    """
    The clamped minimisation problem on one grid, in packed coordinates.

    Wraps domain, operators, load and material into ``energy``/``gradient``
    callables of a flat unknown vector (``energy`` also accepts a stack of
    vectors, one per row).
    """

    def __init__(self, dom, load, thermal: ThermalState, params: MaterialParams):
        self.dom = dom
        self.dims = 1 if isinstance(dom, Domain1D) else 2
        self.ops = spectral_operators(dom.order)
        if self.dims == 1 and isinstance(load, LoadCase):
            load = load.fx
        if self.dims == 2 and not isinstance(load, LoadCase):
            load = LoadCase(fx=float(load))
        self.load = load
        self.thermal = thermal
        self.params = params

    @property
    def n_unknowns(self) -> int:
        return n_unknowns(self.dims, self.dom.order)

    def unpack(self, x) -> DisplacementField:
        return unpack(x, self.dom)

    def energy(self, x):
        field = unpack(x, self.dom)
        if self.dims == 1:
            return bulk_energy_1d(field, self.dom, self.ops, self.load, self.thermal, self.params)
        return bulk_energy_2d(field, self.dom, self.ops, self.load, self.thermal, self.params)

    def gradient(self, x) -> np.ndarray:
        field = unpack(x, self.dom)
        return energy_gradient(field, self.dom, self.ops, self.load, self.thermal, self.params)

    def strains(self, x):
        field = unpack(x, self.dom)
        if self.dims == 1:
            return strains_1d(field, self.dom, self.ops)
        return strains_2d(field, self.dom, self.ops)

    def order_parameter(self, x) -> np.ndarray:
        """Strain in 1D, deviatoric strain e2 in 2D."""
        s = self.strains(x)
        return s if self.dims == 1 else s.e2
