"""Classical trajectories of the gravity-forced trap equation.

Two constructions of solutions of ``x'' + [U - V cos(w t)] x + g = 0``:

* :func:`forced_solution_nested` evaluates the reduction-of-order formula

      x = B X + C X P(t) - g X K(t),
      P(t) = int_b^t dtau / X(tau)^2,
      K(t) = int_b^t dtau / X(tau)^2 int_c^tau X(s) ds,

  literally by nested quadrature. It needs X free of zeros on the window.
* :func:`forced_solution_green` uses variation of parameters on a fundamental
  basis and is valid across zeros of X. This is the production path.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ZeroCrossing
from .grid import SolutionGrid, antiderivative
from .mathieu import DEFAULT_TOL, FundamentalBasis, as_coefficient_function, fundamental_basis, zeros
from .model import SI, EffectiveCoefficients, PhysicalConstants, TrapInput, derive_coefficients

__all__ = [
    "ForcedTrajectory",
    "forced_solution_nested",
    "forced_solution_green",
    "particular_solution",
    "residual",
    "simulate",
    "rescaling_equivalence_check",
    "trajectory_table",
]


@dataclass(frozen=True)
class ForcedTrajectory:
    """A solution of the forced equation together with how it was built.

    Nested-form trajectories carry ``B, C, b, c``; Green-form trajectories
    carry the initial data ``x0, v0`` at the basis start.
    """

    grid: SolutionGrid
    g: complex
    form: str
    B: Optional[complex] = None
    C: Optional[complex] = None
    b: Optional[float] = None
    c: Optional[float] = None
    x0: Optional[complex] = None
    v0: Optional[complex] = None

    def __call__(self, t):
        return self.grid(t)

    def derivative(self, t, order=1):
        return self.grid.derivative(t, order)


def forced_solution_nested(X: SolutionGrid, B, C, g, b=None, c=None, window=None) -> ForcedTrajectory:
    """Evaluate the nested-integral solution on ``window`` (default: all of X).

    The anchors ``b`` and ``c`` default to the window start; any other choice
    is absorbed into B and C. Raises :class:`ZeroCrossing` at the first zero
    of X inside the window, where 1/X^2 is not integrable.
    """
    w0, w1 = (X.t0, X.t1) if window is None else window
    if not (X.t0 <= w0 < w1 <= X.t1):
        raise ValueError(f"window {window!r} must lie inside {X.interval!r}")
    b = w0 if b is None else b
    c = w0 if c is None else c
    if not (w0 <= b <= w1):
        raise ValueError(f"anchor b={b!r} must lie inside the window")

    if X.is_real:
        z = zeros(X, w0, w1)
        if len(z):
            raise ZeroCrossing(float(z[0]))
    else:
        t = X.sample_times(7)
        t = t[(t >= w0) & (t <= w1)]
        mod = np.abs(X(t))
        if mod.min() <= 1e-12 * mod.max():
            raise ZeroCrossing(float(t[np.argmin(mod)]))

    inner = X.nodes[(X.nodes > w0) & (X.nodes < w1)]
    breaks = np.concatenate([[w0], inner, [w1]])

    int_x = antiderivative(X, X.nodes)
    J = lambda t: int_x(t) - int_x(c)  # noqa: E731
    inv_sq = antiderivative(lambda t: X(t) ** -2, breaks)
    nest = antiderivative(lambda t: J(t) / X(t) ** 2, breaks)
    P = lambda t: inv_sq(t) - inv_sq(b)  # noqa: E731
    K = lambda t: nest(t) - nest(b)  # noqa: E731

    def value(t):
        return X(t) * (B + C * P(t) - g * K(t))

    def slope(t):
        x, dx = X(t), X.derivative(t)
        return dx * (B + C * P(t) - g * K(t)) + (C - g * J(t)) / x

    def accel(t):
        return X.derivative(t, 2) * (B + C * P(t) - g * K(t)) - g

    grid = SolutionGrid(breaks, value, slope, accel, form="nested")
    return ForcedTrajectory(grid=grid, g=g, form="nested", B=B, C=C, b=b, c=c)


def particular_solution(basis: FundamentalBasis, forcing):
    """Callables (x, x', x'') of the solution of x'' + c x + forcing = 0 with zero data at t0.

    x_p(t) = -forcing * int_{t0}^t [X1(s) X2(t) - X1(t) X2(s)] / W ds.
    """
    X1, X2 = basis.X1, basis.X2
    I1 = antiderivative(X1, basis.nodes)
    I2 = antiderivative(X2, basis.nodes)
    w = basis.wronskian

    def value(t):
        return -forcing * (X2(t) * I1(t) - X1(t) * I2(t)) / w

    def slope(t):
        return -forcing * (X2.derivative(t) * I1(t) - X1.derivative(t) * I2(t)) / w

    def accel(t):
        wt = X1(t) * X2.derivative(t) - X1.derivative(t) * X2(t)
        return -forcing * (X2.derivative(t, 2) * I1(t) - X1.derivative(t, 2) * I2(t) + wt) / w

    return value, slope, accel


def forced_solution_green(basis: FundamentalBasis, x0, v0, g) -> ForcedTrajectory:
    """Solution with x(t0) = x0, x'(t0) = v0 by variation of parameters."""
    X1, X2 = basis.X1, basis.X2
    pv, ps, pa = particular_solution(basis, g)
    grid = SolutionGrid(
        basis.nodes,
        lambda t: x0 * X1(t) + v0 * X2(t) + pv(t),
        lambda t: x0 * X1.derivative(t) + v0 * X2.derivative(t) + ps(t),
        lambda t: x0 * X1.derivative(t, 2) + v0 * X2.derivative(t, 2) + pa(t),
        form="green",
    )
    return ForcedTrajectory(grid=grid, g=g, form="green", x0=x0, v0=v0)


def residual(traj, coeffs, per_panel=1) -> float:
    """Max of |x'' + (U - V cos w t) x + g| over nodes and panel midpoints.

    The forcing is the trajectory's own ``g``; for a bare
    :class:`SolutionGrid` it is ``coeffs.g``.
    """
    if isinstance(traj, ForcedTrajectory):
        grid, g = traj.grid, traj.g
    else:
        grid, g = traj, getattr(coeffs, "g", 0.0)
    coeff = as_coefficient_function(coeffs)
    t = grid.sample_times(per_panel)
    r = grid.derivative(t, 2) + coeff(t) * grid(t) + g
    return float(np.max(np.abs(r)))


def simulate(coeffs: EffectiveCoefficients, x0, v0, t0, t1, tol=DEFAULT_TOL) -> ForcedTrajectory:
    """Trajectory of the forced equation from (x0, v0) at t0 (Green form)."""
    basis = fundamental_basis(as_coefficient_function(coeffs), t0, t1, tol)
    return forced_solution_green(basis, x0, v0, coeffs.g)


def _same_coefficients(c1, c2, rel=1e-12):
    for name in ("U", "V", "g", "omega"):
        a, b = getattr(c1, name), getattr(c2, name)
        if abs(a - b) > rel * max(abs(a), abs(b), 1e-300):
            return False
    return True


def rescaling_equivalence_check(
    input1: TrapInput,
    input2: TrapInput,
    x0,
    v0,
    periods=10,
    consts: PhysicalConstants = SI,
    tol=DEFAULT_TOL,
    rel=1e-9,
    samples=2001,
) -> bool:
    """True iff both parameter sets give the same trajectory from (x0, v0).

    The motion depends on the hardware only through (U, V, g, omega). Inputs
    whose effective coefficients differ violate the intended precondition; a
    RuntimeWarning is issued and the comparison still runs.
    """
    c1 = derive_coefficients(input1, consts)
    c2 = derive_coefficients(input2, consts)
    if not _same_coefficients(c1, c2):
        warnings.warn(
            "inputs do not share (U, V, g, omega); trajectories are compared anyway",
            RuntimeWarning,
            stacklevel=2,
        )
    t1 = periods * 2.0 * np.pi / max(c1.omega, c2.omega)
    tr1 = simulate(c1, x0, v0, 0.0, t1, tol)
    tr2 = simulate(c2, x0, v0, 0.0, t1, tol)
    t = np.linspace(0.0, t1, samples)
    x1, x2 = tr1(t), tr2(t)
    scale = max(np.max(np.abs(x1)), np.max(np.abs(x2)), 1e-300)
    return bool(np.max(np.abs(x1 - x2)) <= rel * scale)


def trajectory_table(traj, times=None, coeffs=None):
    """Columns t, x, x' (and the equation residual when ``coeffs`` is given)."""
    grid = traj.grid if isinstance(traj, ForcedTrajectory) else traj
    t = grid.nodes if times is None else np.asarray(times, dtype=float)
    cols = [t, np.real(grid(t)), np.real(grid.derivative(t))]
    if coeffs is not None:
        g = traj.g if isinstance(traj, ForcedTrajectory) else 0.0
        coeff = as_coefficient_function(coeffs)
        cols.append(np.abs(grid.derivative(t, 2) + coeff(t) * grid(t) + g))
    return np.column_stack(cols)
