"""Homogeneous (optionally complex-shifted) Mathieu equation.

Everything here is direct integration of::

    x'' + c(t) x + f = 0,      c(t) = U - V cos(omega t) + kappa,

with an adaptive eighth-order embedded Runge-Kutta scheme. The forcing ``f``
is zero except where a caller asks for a direct forced integration.
"""
from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from .errors import IntegrationError
from .grid import ChebyshevPieces, SolutionGrid
from .model import EffectiveCoefficients, from_mathieu_parameters

__all__ = [
    "CoefficientFunction",
    "FundamentalBasis",
    "StabilityVerdict",
    "as_coefficient_function",
    "integrate",
    "fundamental_basis",
    "stability",
    "stability_scan",
    "d_function",
    "zeros",
    "DEFAULT_TOL",
    "FLOQUET_THRESHOLD",
]

log = logging.getLogger(__name__)

DEFAULT_TOL = 1e-10
FLOQUET_THRESHOLD = 1e-9

# Differentiating the dense output costs roughly two orders of magnitude in
# accuracy, so steps are controlled well below the requested residual.
_RTOL_FACTOR = 1.0 / 256.0
_RTOL_FLOOR = 3e-14
_DENSE_DEGREE = 7


@dataclass(frozen=True)
class CoefficientFunction:
    """c(t) = U - V cos(omega t) + kappa.

    ``kappa`` is the constant complex shift produced by a gaussian position
    measurement, -2i hbar / (m T da^2); zero for the unmonitored trap.
    """

    U: float
    V: float = 0.0
    omega: float = 1.0
    kappa: complex = 0.0

    def __post_init__(self):
        if not self.omega > 0:
            raise ValueError(f"omega must be > 0, got {self.omega!r}")

    def __call__(self, t):
        c = self.U - self.V * np.cos(self.omega * np.asarray(t, dtype=float))
        if self.kappa != 0:
            c = c + self.kappa
        return c

    @property
    def is_real(self):
        return complex(self.kappa).imag == 0

    @property
    def period(self):
        return 2.0 * math.pi / self.omega

    @property
    def rate(self):
        """Characteristic inverse time sqrt(|U| + |V| + |kappa|)."""
        return math.sqrt(abs(self.U) + abs(self.V) + abs(self.kappa))

    def conjugate(self):
        return CoefficientFunction(self.U, self.V, self.omega, complex(self.kappa).conjugate())

    def shifted(self, kappa):
        return CoefficientFunction(self.U, self.V, self.omega, kappa)

    @classmethod
    def from_coefficients(cls, c: EffectiveCoefficients, kappa=0.0):
        return cls(c.U, c.V, c.omega, kappa)

    @classmethod
    def from_mathieu(cls, a, q, omega=2.0, kappa=0.0):
        c = from_mathieu_parameters(a, q, omega=omega)
        return cls(c.U, c.V, c.omega, kappa)


def as_coefficient_function(obj, kappa=0.0) -> CoefficientFunction:
    if isinstance(obj, CoefficientFunction):
        return obj if kappa == 0 else obj.shifted(kappa)
    if isinstance(obj, EffectiveCoefficients):
        return CoefficientFunction.from_coefficients(obj, kappa)
    raise TypeError(f"expected CoefficientFunction or EffectiveCoefficients, got {type(obj).__name__}")


def _check_tol(tol):
    if not (0 < tol <= 1e-3):
        raise ValueError(f"tol must lie in (0, 1e-3], got {tol!r}")


def _solve(coeff, t0, t1, initial, forcing=None, tol=DEFAULT_TOL, dense=True):
    """Integrate k solutions of x'' + c x + f_j = 0 from t0 to t1 together.

    ``initial`` is (k, 2) with rows (x0, v0). Each solution is scaled to unit
    size and time to the coefficient's natural rate, so one absolute
    tolerance works in any unit system. Returns (breaks, pieces, end) where
    pieces evaluates (x_1, v_1, ..., x_k, v_k) in physical units.
    """
    initial = np.atleast_2d(np.asarray(initial))
    k = initial.shape[0]
    forcing = np.zeros(k) if forcing is None else np.broadcast_to(np.asarray(forcing), (k,))
    span = abs(t1 - t0)
    rate = coeff.rate
    ts = span if rate == 0 else min(1.0 / rate, span)
    scale = np.maximum.reduce([np.abs(initial[:, 0]), ts * np.abs(initial[:, 1]), ts**2 * np.abs(forcing)])
    scale = np.where(scale > 0, scale, 1.0)

    is_complex = (
        not coeff.is_real or np.iscomplexobj(initial) and np.any(initial.imag != 0)
        or np.iscomplexobj(forcing) and np.any(np.asarray(forcing).imag != 0)
    )
    dtype = complex if is_complex else float
    y0 = np.empty(2 * k, dtype=dtype)
    y0[0::2] = (initial[:, 0] / scale) if is_complex else np.real(initial[:, 0] / scale)
    y0[1::2] = (ts * initial[:, 1] / scale) if is_complex else np.real(ts * initial[:, 1] / scale)
    fs = forcing / scale if is_complex else np.real(forcing / scale)
    has_forcing = np.any(fs != 0)

    def rhs(t, y):
        c = coeff(t)
        dy = np.empty_like(y)
        dy[0::2] = y[1::2] / ts
        acc = -c * y[0::2]
        if has_forcing:
            acc = acc - fs
        dy[1::2] = ts * acc
        return dy

    rtol = max(tol * _RTOL_FACTOR, _RTOL_FLOOR)
    sol = solve_ivp(rhs, (t0, t1), y0, method="DOP853", rtol=rtol, atol=rtol, dense_output=dense)
    if sol.status != 0:
        raise IntegrationError(float(sol.t[-1]), sol.message)

    unscale = np.empty(2 * k)
    unscale[0::2] = scale
    unscale[1::2] = scale / ts
    end = sol.y[:, -1] * unscale
    if not dense:
        return None, None, end
    breaks = np.sort(sol.t)
    pieces = ChebyshevPieces.fit(breaks, lambda t: sol.sol(t) * unscale[:, None], _DENSE_DEGREE)
    return breaks, pieces, end


def _grids_from_pieces(breaks, pieces, k, **meta):
    accel = pieces.derivative()
    grids = []
    for j in range(k):
        xi, vi = 2 * j, 2 * j + 1
        grids.append(
            SolutionGrid(
                breaks,
                lambda t, xi=xi: pieces(t)[..., xi],
                lambda t, vi=vi: pieces(t)[..., vi],
                lambda t, vi=vi: accel(t)[..., vi],
                **meta,
            )
        )
    return grids


def equation_residual(grid: SolutionGrid, coeff, forcing=0.0, per_panel=3):
    """Return (max |x'' + c x + f|, max |c x| + |f|) over nodes and interior points."""
    t = grid.sample_times(per_panel)
    x = grid(t)
    cx = coeff(t) * x
    res = np.abs(grid.derivative(t, 2) + cx + forcing)
    return float(res.max()), float(np.abs(cx).max() + abs(forcing))


def integrate(coeff, t0, t1, value0, slope0, tol=DEFAULT_TOL, forcing=0.0) -> SolutionGrid:
    """Solve x'' + c(t) x + forcing = 0 with x(t0)=value0, x'(t0)=slope0 on [t0, t1].

    The returned grid's ``meta["residual"]`` and ``meta["residual_scale"]``
    record the interpolated equation residual; it is checked against
    ``tol * residual_scale`` and a warning is logged if exceeded.
    """
    coeff = as_coefficient_function(coeff)
    if not t1 > t0:
        raise ValueError(f"need t1 > t0, got t0={t0!r}, t1={t1!r}")
    _check_tol(tol)
    breaks, pieces, _ = _solve(coeff, t0, t1, [[value0, slope0]], [forcing], tol)
    (grid,) = _grids_from_pieces(breaks, pieces, 1, coeff=coeff, forcing=forcing, tol=tol)
    res, scale = equation_residual(grid, coeff, forcing)
    grid.meta.update(residual=res, residual_scale=scale)
    if res > tol * scale and res > 1e-12 * (1.0 + scale):
        log.warning("integrate: residual %.3e exceeds tol*scale = %.3e", res, tol * scale)
    return grid


@dataclass(frozen=True)
class FundamentalBasis:
    """Solutions with (X1, X1') = (1, 0) and (X2, X2') = (0, 1) at t0."""

    X1: SolutionGrid
    X2: SolutionGrid
    wronskian: complex
    wronskian_drift: float
    coeff: CoefficientFunction

    @property
    def t0(self):
        return self.X1.t0

    @property
    def t1(self):
        return self.X1.t1

    @property
    def nodes(self):
        return self.X1.nodes

    def wronskian_at(self, t):
        t = np.asarray(t, dtype=float)
        return self.X1(t) * self.X2.derivative(t) - self.X1.derivative(t) * self.X2(t)

    def solution(self, value0, slope0):
        """Homogeneous solution with the given data at t0, as a grid."""
        return SolutionGrid.combine([(value0, self.X1), (slope0, self.X2)], coeff=self.coeff)


def fundamental_basis(coeff, t0, t1, tol=DEFAULT_TOL) -> FundamentalBasis:
    coeff = as_coefficient_function(coeff)
    if not t1 > t0:
        raise ValueError(f"need t1 > t0, got t0={t0!r}, t1={t1!r}")
    _check_tol(tol)
    breaks, pieces, _ = _solve(coeff, t0, t1, [[1.0, 0.0], [0.0, 1.0]], None, tol)
    X1, X2 = _grids_from_pieces(breaks, pieces, 2, coeff=coeff, forcing=0.0, tol=tol)
    w = X1.value * X2.slope - X1.slope * X2.value
    w0 = complex(w[0])
    drift = float(np.max(np.abs(w - w0)) / abs(w0))
    if drift > 1e-8:
        log.warning("fundamental_basis: Wronskian drift %.3e", drift)
    return FundamentalBasis(X1, X2, w0 if np.iscomplexobj(w) else w0.real, drift, coeff)


@dataclass(frozen=True)
class StabilityVerdict:
    multipliers: tuple
    classification: str
    monodromy: np.ndarray

    @property
    def moduli(self):
        return tuple(abs(m) for m in self.multipliers)

    @property
    def trace(self):
        return float(np.real(np.trace(self.monodromy)))


def monodromy(coeff, tol=DEFAULT_TOL):
    """One-period monodromy matrix [[X1, X2], [X1', X2']] at t0 + 2 pi / omega."""
    coeff = as_coefficient_function(coeff)
    _check_tol(tol)
    _, _, end = _solve(coeff, 0.0, coeff.period, [[1.0, 0.0], [0.0, 1.0]], None, tol, dense=False)
    return np.array([[end[0], end[2]], [end[1], end[3]]])


def classify(multipliers, threshold=FLOQUET_THRESHOLD):
    """Floquet classification of a multiplier pair.

    Unstable if any modulus exceeds 1 + threshold. Marginal when both sit on
    the unit circle as a (near) real degenerate pair at +1 or -1, i.e. on a
    transition curve. Otherwise stable.
    """
    mods = np.abs(multipliers)
    if mods.max() > 1.0 + threshold:
        return "unstable"
    on_circle = np.all(np.abs(mods - 1.0) <= threshold)
    if on_circle and np.all(np.abs(np.imag(multipliers)) <= threshold):
        return "marginal"
    return "stable"


def stability(coeff, tol=DEFAULT_TOL, threshold=FLOQUET_THRESHOLD) -> StabilityVerdict:
    coeff = as_coefficient_function(coeff)
    if not coeff.is_real:
        raise ValueError("stability requires a real periodic coefficient (kappa = 0)")
    M = monodromy(coeff, tol)
    mu = np.linalg.eigvals(M)
    mu = mu[np.argsort(-np.abs(mu), kind="stable")]
    return StabilityVerdict(tuple(complex(m) for m in mu), classify(mu, threshold), M)


def _scan_point(args):
    a, q, omega, tol = args
    v = stability(CoefficientFunction.from_mathieu(a, q, omega=omega), tol)
    m1, m2 = v.moduli
    return (a, q, m1, m2, v.classification)


def stability_scan(a_values, q_values, omega=2.0, tol=DEFAULT_TOL, jobs=1):
    """Classify every (a, q) pair; rows ordered a-major, q-minor.

    Returns a list of (a, q, |mu1|, |mu2|, classification) with |mu1| >= |mu2|.
    """
    tasks = [(float(a), float(q), omega, tol) for a in a_values for q in q_values]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_scan_point, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))
    return [_scan_point(t) for t in tasks]


def d_function(coeff, tprime, tdoubleprime, tol=DEFAULT_TOL) -> complex:
    """Value at t'' of the solution with value 0 and slope 1 at t'.

    Equals x(t') x(t'') * integral of x^-2 over [t', t''] for any solution x
    without zeros there. Either time order is accepted.
    """
    coeff = as_coefficient_function(coeff)
    _check_tol(tol)
    if tdoubleprime == tprime:
        return 0.0
    _, _, end = _solve(coeff, tprime, tdoubleprime, [[0.0, 1.0]], None, tol, dense=False)
    d = end[0]
    return complex(d) if np.iscomplexobj(d) else float(d)


def zeros(grid: SolutionGrid, t_start=None, t_end=None, per_panel=7):
    """Zeros of the real part of ``grid`` inside [t_start, t_end], ascending."""
    t_start = grid.t0 if t_start is None else t_start
    t_end = grid.t1 if t_end is None else t_end
    t = grid.sample_times(per_panel)
    t = t[(t >= t_start) & (t <= t_end)]
    t = np.unique(np.concatenate([[t_start], t, [t_end]]))
    x = np.real(grid(t))
    out = []
    exact = np.flatnonzero(x == 0)
    out.extend(t[exact])
    sign_change = np.flatnonzero(x[:-1] * x[1:] < 0)
    for i in sign_change:
        out.append(brentq(lambda s: float(np.real(grid(s))), t[i], t[i + 1], xtol=1e-14, rtol=1e-14))
    return np.array(sorted(set(out)))
