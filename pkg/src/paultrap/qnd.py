"""Quantum nondemolition variables of the gravity-shifted trap.

A = rho q + sigma p is nondemolition when r = rho / sigma solves the Riccati
equation

    dr/dt = r^2 / m + m [U - V cos(w t)].

For any solution X of the homogeneous trap equation (with the gravity-shifted
U), r = -m X'/X does. Each nowhere-zero sigma then gives a member
A = sigma (p - (m X'/X) q) of the family.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError, PoleDetected
from .grid import SolutionGrid
from .mathieu import as_coefficient_function, zeros
from .model import EffectiveCoefficients

__all__ = [
    "QndRatio",
    "QndVariable",
    "canonical_ratio",
    "closed_form_ratio",
    "qnd_residual",
    "qnd_variable",
    "hamiltonian_value",
    "DEFAULT_EXCLUSION",
]

DEFAULT_EXCLUSION = 0.01  # fraction of the drive period


@dataclass(frozen=True, eq=False)
class QndRatio:
    """rho/sigma sampled at ``times`` with its time derivative.

    ``poles`` lists zeros of the generating solution, where the ratio
    diverges; they are excluded from residual norms rather than treated as
    failures.
    """

    times: np.ndarray
    ratio: np.ndarray
    ratio_dot: np.ndarray
    poles: np.ndarray
    mass: float
    source: str


def canonical_ratio(X: SolutionGrid, m, times=None) -> QndRatio:
    """F(t) = -m X'(t) / X(t) sampled on ``times`` (default: nodes and midpoints)."""
    if not X.is_real:
        raise ParameterError("X", "canonical ratio needs a real solution")
    if not m > 0:
        raise ParameterError("mass", f"must be > 0, got {m!r}")
    t = X.sample_times(1) if times is None else np.asarray(times, dtype=float)
    x = np.real(X(t))
    dx = np.real(X.derivative(t))
    ddx = np.real(X.derivative(t, 2))
    poles = zeros(X)
    with np.errstate(divide="ignore", invalid="ignore"):
        r = -m * dx / x
        r_dot = -m * (ddx / x - (dx / x) ** 2)
    return QndRatio(times=t, ratio=r, ratio_dot=r_dot, poles=poles, mass=m, source="solution")


def closed_form_ratio(times, func, deriv, m, poles=()) -> QndRatio:
    """Ratio given analytically by ``func`` and its derivative ``deriv``."""
    t = np.asarray(times, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        r, r_dot = np.asarray(func(t), dtype=float), np.asarray(deriv(t), dtype=float)
    return QndRatio(
        times=t, ratio=r, ratio_dot=r_dot, poles=np.asarray(poles, dtype=float), mass=m, source="closed-form"
    )


@dataclass(frozen=True, eq=False)
class QndVariable:
    """A = rho q + sigma p with rho = sigma * ratio."""

    ratio: QndRatio
    sigma: np.ndarray
    sigma_dot: np.ndarray
    rho: np.ndarray
    rho_dot: np.ndarray

    @property
    def times(self):
        return self.ratio.times

    def observable(self, q, p):
        return self.rho * q + self.sigma * p

    def gauge_ratio(self):
        """(rho/sigma, d/dt (rho/sigma)) rebuilt from rho, sigma and their derivatives."""
        r = self.rho / self.sigma
        r_dot = (self.rho_dot * self.sigma - self.rho * self.sigma_dot) / self.sigma**2
        return r, r_dot


def qnd_variable(ratio: QndRatio, sigma, sigma_dot=None) -> QndVariable:
    """Family member for the gauge function ``sigma``.

    ``sigma`` is a callable of time or an array on ``ratio.times``. With
    sigma = 1 the observable is p - (m X'/X) q.
    """
    t = ratio.times
    if callable(sigma):
        s = np.asarray(sigma(t), dtype=float) * np.ones_like(t)
        s_dot = None if sigma_dot is None else np.asarray(sigma_dot(t), dtype=float) * np.ones_like(t)
    else:
        s = np.asarray(sigma, dtype=float) * np.ones_like(t)
        s_dot = None if sigma_dot is None else np.asarray(sigma_dot, dtype=float) * np.ones_like(t)
    if np.any(s == 0) or not np.all(np.isfinite(s)):
        raise ParameterError("sigma", "must be finite and nowhere zero")
    if s_dot is None:
        s_dot = np.gradient(s, t, edge_order=2)
    rho = s * ratio.ratio
    rho_dot = s_dot * ratio.ratio + s * ratio.ratio_dot
    return QndVariable(ratio=ratio, sigma=s, sigma_dot=s_dot, rho=rho, rho_dot=rho_dot)


@dataclass(frozen=True)
class ResidualReport:
    residual_max: float
    pole_times: list = field(default_factory=list)
    excluded: int = 0


def qnd_residual(ratio, coeffs, exclusion_radius=None, report=False):
    """Max |d(r)/dt - r^2/m - m (U - V cos w t)| away from poles.

    ``ratio`` is a :class:`QndRatio` or a :class:`QndVariable` (then r is
    rebuilt as rho/sigma). Samples within ``exclusion_radius`` of a flagged
    pole are skipped; the default radius is 1% of the drive period. A
    non-finite value outside the exclusion zones raises :class:`PoleDetected`.
    """
    if isinstance(ratio, QndVariable):
        r, r_dot = ratio.gauge_ratio()
        base = ratio.ratio
    else:
        r, r_dot = ratio.ratio, ratio.ratio_dot
        base = ratio
    coeff = as_coefficient_function(coeffs)
    if not coeff.is_real:
        raise ParameterError("coeffs", "the nondemolition condition uses the real trap coefficient")
    if exclusion_radius is None:
        exclusion_radius = DEFAULT_EXCLUSION * coeff.period
    t = base.times
    keep = np.ones(len(t), dtype=bool)
    for p in base.poles:
        keep &= np.abs(t - p) > exclusion_radius
    m = base.mass
    with np.errstate(invalid="ignore", over="ignore"):
        res = np.abs(r_dot - r * r / m - m * coeff(t))
    bad = keep & ~np.isfinite(res)
    if np.any(bad):
        raise PoleDetected(t[bad][:10])
    value = float(np.max(res[keep])) if np.any(keep) else 0.0
    if report:
        return ResidualReport(value, [float(p) for p in base.poles], int(np.sum(~keep)))
    return value


def hamiltonian_value(q, p, t, coeffs: EffectiveCoefficients):
    """H = p^2/(2m) + (m/2)[U - V cos(w t)] q^2 + m g q.

    The gravity term carries the sign that generates x'' + ... + g = 0, the
    equation of motion used everywhere else in the package.
    """
    m = coeffs.mass
    return p * p / (2.0 * m) + 0.5 * m * coeffs.coefficient(t) * q * q + m * coeffs.g * q
