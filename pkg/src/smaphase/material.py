"""
Landau free energy for the square-to-rectangular martensitic transformation.

Units are a consistent internal system (g, ms, cm, K). All functions are
vectorised over numpy arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


class NoWells(ValueError):
    """Raised when the Landau density has no martensite wells (austenite only)."""


class NonpositiveTemperature(ValueError):
    pass


@dataclass(frozen=True)
class MaterialParams:
    """
    Landau coefficients and auxiliary constants of an SMA.

    Attributes:
        a1: dilatational stiffness [g/(ms²·cm)]
        a2: temperature slope of the quadratic Landau coefficient [g/(ms²·cm·K)]
        a3: shear stiffness [g/(ms²·cm)]
        a4: quartic Landau coefficient [g/(ms²·cm)]
        a6: sextic Landau coefficient [g/(ms²·cm)]
        theta0: transformation temperature [K]
        cv: specific heat [g/(ms²·cm·K)]
        rho: density [g/cm³]
        k: conductivity [cm·g/(ms³·K)]

    ``cv``, ``rho`` and ``k`` play no role in the static minimisation; they are
    kept so a parameter set describes the alloy completely.
    """
    a1: float
    a2: float
    a3: float
    a4: float
    a6: float
    theta0: float
    cv: float = 3.1274
    rho: float = 11.1
    k: float = 1.9e-2

    def __post_init__(self):
        for name in ("a2", "a4", "a6", "theta0"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")

    @property
    def austenite_limit(self) -> float:
        """Largest temperature offset at which martensite wells still exist."""
        return self.a4 ** 2 / (4.0 * self.a6 * self.a2)


@dataclass(frozen=True)
class ThermalState:
    theta: float
    theta0: float = 208.0

    @property
    def delta_theta(self) -> float:
        return self.theta - self.theta0

    @classmethod
    def at(cls, theta: float, params: MaterialParams) -> "ThermalState":
        return cls(theta=theta, theta0=params.theta0)


def default_params() -> MaterialParams:
    """Au23Cu30Zn47 with a1 = 2*a2 and a3 = a2 (stored as plain numbers)."""
    a2 = 480.0
    return MaterialParams(
        a1=2.0 * a2,
        a2=a2,
        a3=a2,
        a4=6.0e6,
        a6=4.5e8,
        theta0=208.0,
        cv=3.1274,
        rho=11.1,
        k=1.9e-2,
    )


def landau_density(e2, dtheta, p: MaterialParams):
    """(a2/2)*dθ*e² - (a4/4)*e⁴ + (a6/6)*e⁶."""
    s = np.square(e2)
    return s * (0.5 * p.a2 * dtheta + s * (-0.25 * p.a4 + s * (p.a6 / 6.0)))


def landau_density_derivative(e2, dtheta, p: MaterialParams):
    s = np.square(e2)
    return e2 * (p.a2 * dtheta + s * (-p.a4 + s * p.a6))


def landau_density_second_derivative(e2, dtheta, p: MaterialParams):
    s = np.square(e2)
    return p.a2 * dtheta + s * (-3.0 * p.a4 + s * 5.0 * p.a6)


def martensite_wells(dtheta: float, p: MaterialParams) -> tuple[float, float]:
    """
    Return the two symmetric strains minimising the Landau density.

    Stationary points satisfy a2*dθ - a4*e² + a6*e⁴ = 0, a quadratic in e².
    The larger root e² = (a4 + sqrt(a4² - 4*a6*a2*dθ)) / (2*a6) is the
    minimum; the smaller one (when positive) is the barrier top.
    """
    disc = p.a4 ** 2 - 4.0 * p.a6 * p.a2 * dtheta
    if disc < 0:
        raise NoWells(
            f"no martensite wells at dtheta={dtheta}: discriminant {disc:.4g} < 0"
        )
    e_star = math.sqrt((p.a4 + math.sqrt(disc)) / (2.0 * p.a6))
    return e_star, -e_star


def full_density_2d(e1, e2, e3, dtheta, p: MaterialParams):
    return 0.5 * p.a1 * np.square(e1) + 0.5 * p.a3 * np.square(e3) + landau_density(e2, dtheta, p)


def thermal_offset(theta: float, p: MaterialParams) -> float:
    """-cv*θ*ln θ. Reporting only; it shifts the density and never enters W."""
    if not theta > 0:
        raise NonpositiveTemperature(f"temperature must be positive, got {theta}")
    return -p.cv * theta * math.log(theta)
