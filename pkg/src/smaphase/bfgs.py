"""
Fixed-relaxation BFGS refinement.

The iteration is x_{k+1} = x_k + alpha*d_k with d_k solving B_k d_k = -grad W(x_k)
and B_0 = I. There is no line search; alpha is a constant relaxation factor.
Termination is on the step norm ||x_{k+1} - x_k|| <= tolerance.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
import scipy.linalg

logger = logging.getLogger(__name__)


class SingularApproximation(np.linalg.LinAlgError):
    pass


class NonFiniteEnergy(FloatingPointError):
    pass


class MaxIterationsExceeded(RuntimeWarning):
    pass


@dataclass(frozen=True)
class BfgsConfig:
    """
    Attributes:
        relaxation: fixed step factor alpha_k in (0, 1]
        tolerance: step-norm threshold delta [cm]
        max_iterations: iteration cap
        curvature_guard: the update is skipped unless y.s > guard*|s||y|
        max_halvings: step halvings tried when a step would raise the energy
        scale_initial: rescale B_0 = I by y.y/y.s at the first accepted update
    """
    relaxation: float = 0.1
    tolerance: float = 1e-6
    max_iterations: int = 20000
    curvature_guard: float = 1e-12
    max_halvings: int = 40
    scale_initial: bool = False

    def __post_init__(self):
        if not 0 < self.relaxation <= 1:
            raise ValueError(f"relaxation must lie in (0, 1], got {self.relaxation}")
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")
        if self.max_iterations < 0 or self.max_halvings < 0:
            raise ValueError("iteration counts must be non-negative")


@dataclass
class BfgsState:
    x: np.ndarray
    grad: np.ndarray
    hessian_approx: np.ndarray
    energy: float = np.nan
    iteration: int = 0
    last_step_norm: float = np.inf

    @classmethod
    def initial(cls, x, grad, energy=np.nan) -> "BfgsState":
        x = np.asarray(x, dtype=float)
        return cls(x=x.copy(), grad=np.asarray(grad, dtype=float), hessian_approx=np.eye(x.size),
                   energy=energy)


@dataclass
class RefineResult:
    x: np.ndarray
    energy: float
    step_norms: list = field(default_factory=list)
    energies: list = field(default_factory=list)
    converged: bool = False
    iterations: int = 0
    halvings: int = 0
    resets: int = 0
    skipped_updates: int = 0


@dataclass(frozen=True)
class FunctionProblem:
    """Adapter turning a pair of callables into an object with energy/gradient."""
    energy: Callable
    gradient: Callable


def descent_direction(state: BfgsState) -> np.ndarray:
    """
    Solve B_k d = -g with a Cholesky factorisation.

    If B_k is not positive definite it is reset to the identity in place and
    the steepest-descent direction is returned.
    """
    try:
        factor = scipy.linalg.cho_factor(state.hessian_approx, lower=True, check_finite=True)
        d = -scipy.linalg.cho_solve(factor, state.grad)
        if np.all(np.isfinite(d)):
            return d
    except (np.linalg.LinAlgError, ValueError):
        pass
    logger.warning("BFGS matrix not positive definite at iteration %d; reset to identity",
                   state.iteration)
    state.hessian_approx = np.eye(state.grad.size)
    return -state.grad.copy()


def bfgs_update(B: np.ndarray, s: np.ndarray, y: np.ndarray, guard: float = 1e-12) -> np.ndarray:
    """
    B + y y^T/(y.s) - (B s)(B s)^T/(s.B s), using the actual step ``s``.

    Returns ``B`` itself when the curvature y.s is not safely positive.
    """
    s = np.asarray(s, dtype=float)
    y = np.asarray(y, dtype=float)
    if not np.any(s):
        raise ValueError("step must be nonzero")
    ys = float(y @ s)
    if not ys > guard * np.linalg.norm(s) * np.linalg.norm(y):
        return B
    Bs = B @ s
    sBs = float(s @ Bs)
    B_next = B - np.outer(Bs, Bs) / sBs + np.outer(y, y) / ys
    return 0.5 * (B_next + B_next.T)


def _finite(value, where):
    if not np.isfinite(value):
        raise NonFiniteEnergy(f"non-finite energy {value} at {where}")
    return value


def refine(problem, x0, cfg: BfgsConfig = BfgsConfig(),
           step_rule: Optional[Callable[[np.ndarray, np.ndarray], float]] = None) -> RefineResult:
    """
    Run fixed-relaxation BFGS from ``x0``.

    ``problem`` provides ``energy(x)`` and ``gradient(x)``. ``step_rule``, if
    given, replaces the fixed relaxation by alpha = step_rule(x, d), e.g. an
    exact line search on a quadratic.

    A trial step that raises the energy is halved up to ``cfg.max_halvings``
    times; if none of the shortened steps descends, the iterate is taken as
    converged to round-off and the loop stops. The returned point is therefore
    never worse than ``x0``.
    """
    x = np.array(x0, dtype=float)
    if not np.all(np.isfinite(x)):
        raise NonFiniteEnergy("initial point is not finite")
    state = BfgsState.initial(x, problem.gradient(x), _finite(problem.energy(x), "x0"))
    result = RefineResult(x=state.x.copy(), energy=state.energy, energies=[state.energy])
    first_update = True

    while state.iteration < cfg.max_iterations:
        d = descent_direction(state)
        if state.grad @ d >= 0:
            state.hessian_approx = np.eye(d.size)
            result.resets += 1
            d = -state.grad
        alpha = cfg.relaxation if step_rule is None else float(step_rule(state.x, d))
        step = alpha * d
        x_new = state.x + step
        e_new = problem.energy(x_new)
        halvings = 0
        while not (np.isfinite(e_new) and e_new <= state.energy + 1e-12 * abs(state.energy)) \
                and halvings < cfg.max_halvings:
            step *= 0.5
            x_new = state.x + step
            e_new = problem.energy(x_new)
            halvings += 1
        result.halvings += halvings
        state.iteration += 1
        if not (np.isfinite(e_new) and e_new <= state.energy + 1e-12 * abs(state.energy)):
            # no descent along d even after shortening; stationary to round-off
            logger.info("no descending step at iteration %d; stopping", state.iteration)
            state.last_step_norm = 0.0
            result.step_norms.append(0.0)
            result.converged = True
            break

        g_new = problem.gradient(x_new)
        s = x_new - state.x
        y = g_new - state.grad
        step_norm = float(np.linalg.norm(s))
        if np.any(s):
            B = state.hessian_approx
            if first_update and cfg.scale_initial and y @ s > 0:
                B = (y @ y) / (y @ s) * np.eye(s.size)
            B_next = bfgs_update(B, s, y, cfg.curvature_guard)
            if B_next is B and B is state.hessian_approx:
                result.skipped_updates += 1
            else:
                first_update = False
            state.hessian_approx = B_next

        state.x, state.grad, state.energy = x_new, g_new, float(e_new)
        state.last_step_norm = step_norm
        result.step_norms.append(step_norm)
        result.energies.append(state.energy)
        if step_norm <= cfg.tolerance:
            result.converged = True
            break

    result.x = state.x
    result.energy = state.energy
    result.iterations = state.iteration
    if not result.converged and cfg.max_iterations > 0:
        warnings.warn(
            f"BFGS stopped after {state.iteration} iterations with step norm "
            f"{state.last_step_norm:.3e} > {cfg.tolerance:.1e}",
            MaxIterationsExceeded,
            stacklevel=2,
        )
    return result
