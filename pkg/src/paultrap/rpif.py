"""Continuous position monitoring with a gaussian weight functional.

A record a(t) on [t', t''] with resolution ``delta_a`` weights each path by
exp{-(1/(T da^2)) int (x - a)^2 dt}. The path integral stays gaussian: the
weight adds the constant complex shift

    kappa = -2 i hbar / (m T da^2)

to the trap coefficient and the forcing becomes f = g - kappa <a>, where <a>
is the time average of the record. The amplitude factorises into a Van Vleck
prefactor sqrt(m / (2 i pi hbar D)), the phase exp(i S / hbar) of the complex
classical action, and exp{-(1/(T da^2)) int a^2 dt}.

Following the source model, the record enters the classical problem only
through <a> (and the norm factor through int a^2); results carry an
``approximation`` flag saying so.
"""
from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.integrate import trapezoid

from .errors import DegenerateBVP, NonFiniteError, ParameterError
from .grid import SolutionGrid, panel_integral
from .mathieu import DEFAULT_TOL, CoefficientFunction, FundamentalBasis, fundamental_basis
from .model import SI, EffectiveCoefficients, PhysicalConstants
from .trajectory import particular_solution

__all__ = [
    "UNMONITORED",
    "MeasurementRecord",
    "ComplexPathResult",
    "PropagatorValue",
    "ProbabilityValue",
    "effective_shift",
    "complex_classical_path",
    "action_functional",
    "classical_action",
    "propagator",
    "probability_density",
    "record_sweep",
    "MEAN_RECORD_APPROXIMATION",
]

log = logging.getLogger(__name__)

MEAN_RECORD_APPROXIMATION = "record enters the classical problem through its time average <a>"
DEGENERACY_THRESHOLD = 1e-8


class _Unmonitored:
    """Infinite resolution: no measurement at all."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "UNMONITORED"

    def __reduce__(self):
        return (_Unmonitored, ())


UNMONITORED = _Unmonitored()


@dataclass(frozen=True, eq=False)
class MeasurementRecord:
    """Readout ``samples`` of x on a uniform grid over [tprime, tdoubleprime]."""

    tprime: float
    tdoubleprime: float
    delta_a: object
    samples: np.ndarray

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=float)
        if samples.ndim != 1 or len(samples) < 2:
            raise ParameterError("samples", "need a 1-d sequence of at least two readings")
        if not np.all(np.isfinite(samples)):
            raise ParameterError("samples", "readings must be finite")
        if not (math.isfinite(self.tprime) and math.isfinite(self.tdoubleprime)):
            raise ParameterError("t_start", "times must be finite")
        if not self.tdoubleprime > self.tprime:
            raise ParameterError("t_end", f"must exceed t_start, got [{self.tprime!r}, {self.tdoubleprime!r}]")
        if self.delta_a is not UNMONITORED:
            if isinstance(self.delta_a, bool) or not isinstance(self.delta_a, (int, float)):
                raise ParameterError("delta_a", f"must be a positive number or 'unmonitored', got {self.delta_a!r}")
            if not (math.isfinite(self.delta_a) and self.delta_a > 0):
                raise ParameterError("delta_a", f"must be positive and finite, got {self.delta_a!r}")
        samples.flags.writeable = False
        object.__setattr__(self, "samples", samples)

    @property
    def duration(self):
        return self.tdoubleprime - self.tprime

    @property
    def monitored(self):
        return self.delta_a is not UNMONITORED

    @property
    def times(self):
        return np.linspace(self.tprime, self.tdoubleprime, len(self.samples))

    @property
    def mean(self):
        return float(trapezoid(self.samples, self.times) / self.duration)

    @property
    def square_integral(self):
        return float(trapezoid(self.samples**2, self.times))

    @property
    def log_norm(self):
        """log of exp{-(1/(T da^2)) int a^2 dt}; zero when unmonitored."""
        if not self.monitored:
            return 0.0
        return -self.square_integral / (self.duration * self.delta_a**2)

    def with_resolution(self, delta_a):
        return MeasurementRecord(self.tprime, self.tdoubleprime, delta_a, self.samples)

    @classmethod
    def constant(cls, tprime, tdoubleprime, delta_a, value, n=65):
        return cls(tprime, tdoubleprime, delta_a, np.full(n, float(value)))

    @classmethod
    def unmonitored(cls, tprime, tdoubleprime, samples=(0.0, 0.0)):
        return cls(tprime, tdoubleprime, UNMONITORED, np.asarray(samples, dtype=float))

    @classmethod
    def from_dict(cls, doc):
        if not isinstance(doc, dict):
            raise ParameterError("record", "must be a JSON object")
        for key in doc:
            if key not in ("t_start", "t_end", "delta_a", "samples"):
                raise ParameterError(key, "unknown record field")
        for key in ("t_start", "t_end", "delta_a", "samples"):
            if key not in doc:
                raise ParameterError(key, "missing record field")
        for key in ("t_start", "t_end"):
            if isinstance(doc[key], bool) or not isinstance(doc[key], (int, float)):
                raise ParameterError(key, f"must be a number, got {doc[key]!r}")
        da = doc["delta_a"]
        if da == "unmonitored":
            da = UNMONITORED
        elif isinstance(da, str):
            raise ParameterError("delta_a", f"must be a number or 'unmonitored', got {da!r}")
        samples = doc["samples"]
        if not isinstance(samples, list) or not all(
            isinstance(s, (int, float)) and not isinstance(s, bool) for s in samples
        ):
            raise ParameterError("samples", "must be a list of numbers")
        return cls(float(doc["t_start"]), float(doc["t_end"]), da, np.asarray(samples, dtype=float))

    def to_dict(self):
        return {
            "t_start": self.tprime,
            "t_end": self.tdoubleprime,
            "delta_a": "unmonitored" if not self.monitored else self.delta_a,
            "samples": [float(s) for s in self.samples],
        }


def _shift(mass, record, hbar):
    if not record.monitored:
        return 0.0
    return -2j * hbar / (mass * record.duration * record.delta_a**2)


def effective_shift(mass, record: MeasurementRecord, consts: PhysicalConstants = SI) -> complex:
    """kappa = -2 i hbar / (m T da^2), or 0 for an unmonitored record."""
    if not mass > 0:
        raise ParameterError("mass", f"must be > 0, got {mass!r}")
    return _shift(mass, record, consts.hbar)


@dataclass(frozen=True, eq=False)
class ComplexPathResult:
    """Complex classical path from x' at t' to x'' at t''.

    ``path`` solves x'' + (c + kappa) x + forcing = 0; its real and imaginary
    parts are :attr:`x1` and :attr:`x2`. ``action`` is S1 + i S2.
    """

    path: SolutionGrid
    action: complex
    xprime: float
    xdoubleprime: float
    kappa: complex
    forcing: complex
    d_value: complex
    basis: FundamentalBasis
    mass: float
    approximation: str = MEAN_RECORD_APPROXIMATION

    @property
    def x1(self):
        return self.path.real

    @property
    def x2(self):
        return self.path.imag

    def residual(self, per_panel=1):
        coeff = self.basis.coeff
        t = self.path.sample_times(per_panel)
        r = self.path.derivative(t, 2) + coeff(t) * self.path(t) + self.forcing
        return float(np.max(np.abs(r)))


def _degenerate(basis, tprime, tdoubleprime):
    d = basis.X2.value[-1]
    if abs(d) <= DEGENERACY_THRESHOLD * np.max(np.abs(basis.X2.value)):
        raise DegenerateBVP((tprime, tdoubleprime), d)
    return d


def _complex_path(coeffs, record, xprime, xdoubleprime, hbar, tol):
    m = coeffs.mass
    kappa = _shift(m, record, hbar)
    forcing = coeffs.g - kappa * record.mean if record.monitored else coeffs.g
    coeff = CoefficientFunction.from_coefficients(coeffs, kappa)
    basis = fundamental_basis(coeff, record.tprime, record.tdoubleprime, tol)
    d = _degenerate(basis, record.tprime, record.tdoubleprime)
    pv, ps, pa = particular_solution(basis, forcing)
    beta = (xdoubleprime - xprime * basis.X1.value[-1] - pv(np.array(record.tdoubleprime))) / d
    X1, X2 = basis.X1, basis.X2
    path = SolutionGrid(
        basis.nodes,
        lambda t: xprime * X1(t) + beta * X2(t) + pv(t),
        lambda t: xprime * X1.derivative(t) + beta * X2.derivative(t) + ps(t),
        lambda t: xprime * X1.derivative(t, 2) + beta * X2.derivative(t, 2) + pa(t),
    )
    action = action_functional(coeffs, kappa, forcing, path, path.derivative, path.nodes)
    return ComplexPathResult(
        path=path,
        action=complex(action),
        xprime=xprime,
        xdoubleprime=xdoubleprime,
        kappa=kappa,
        forcing=forcing,
        d_value=complex(d),
        basis=basis,
        mass=m,
    )


def complex_classical_path(
    coeffs: EffectiveCoefficients,
    record: MeasurementRecord,
    xprime,
    xdoubleprime,
    consts: PhysicalConstants = SI,
    tol=DEFAULT_TOL,
) -> ComplexPathResult:
    """Solve the complex boundary value problem of the monitored particle.

    x'' + [U - V cos(w t) + kappa] x + g - kappa <a> = 0 with x(t') = x',
    x(t'') = x''. Built from the shifted fundamental basis plus the Green-form
    particular solution. Raises :class:`DegenerateBVP` at a caustic.
    """
    return _complex_path(coeffs, record, xprime, xdoubleprime, consts.hbar, tol)


def action_functional(coeffs, kappa, forcing, value, slope, breaks):
    """int [ (m/2) x'^2 - (m/2)(c + kappa) x^2 - m f x ] dt over panels ``breaks``.

    Its Euler-Lagrange equation is x'' + (c + kappa) x + f = 0. With the
    measurement shift this is the gaussian-weighted Lagrangian with the a^2
    term removed (it sits in the record norm) and a replaced by <a>.
    """
    m = coeffs.mass

    def lagrangian(t):
        x, v = value(t), slope(t)
        c = coeffs.U - coeffs.V * np.cos(coeffs.omega * t) + kappa
        return 0.5 * m * v * v - 0.5 * m * c * x * x - m * forcing * x

    return np.sum(panel_integral(lagrangian, breaks))


def classical_action(path: ComplexPathResult, coeffs, record=None) -> complex:
    """Complex action S1 + i S2 along ``path`` (recomputed from its grid)."""
    p = path.path
    return complex(action_functional(coeffs, path.kappa, path.forcing, p, p.derivative, p.nodes))


@dataclass(frozen=True)
class PropagatorValue:
    """amplitude = prefactor * exp(i S / hbar) * record_norm.

    ``log_amplitude`` is kept because the linear value over- or underflows
    in SI units.
    """

    amplitude: complex
    prefactor: complex
    phase_action: complex
    record_norm: float
    log_amplitude: complex
    d_value: complex


def _propagator(coeffs, record, xprime, xdoubleprime, hbar, tol, path=None):
    path = path or _complex_path(coeffs, record, xprime, xdoubleprime, hbar, tol)
    m = coeffs.mass
    prefactor = np.sqrt(m / (2j * math.pi * hbar * path.d_value))
    log_amp = np.log(prefactor) + 1j * path.action / hbar + record.log_norm
    return PropagatorValue(
        amplitude=complex(np.exp(log_amp)),
        prefactor=complex(prefactor),
        phase_action=path.action,
        record_norm=math.exp(record.log_norm),
        log_amplitude=complex(log_amp),
        d_value=path.d_value,
    ), path


def propagator(
    coeffs: EffectiveCoefficients,
    record: MeasurementRecord,
    xprime,
    xdoubleprime,
    consts: PhysicalConstants = SI,
    tol=DEFAULT_TOL,
    convention=1,
) -> PropagatorValue:
    """Propagator from x' to x'' given the record.

    ``convention=-1`` flips the sign of i throughout (equivalently hbar ->
    -hbar); the result is the complex conjugate.
    """
    if convention not in (1, -1):
        raise ValueError("convention must be +1 or -1")
    return _propagator(coeffs, record, xprime, xdoubleprime, convention * consts.hbar, tol)[0]


@dataclass(frozen=True)
class ProbabilityValue:
    """Probability density of a record, with its log-space factor breakdown.

    ``factors`` holds the logarithms of: the normalisation m/(2 pi hbar); the
    record factor exp{-(2/(T da^2)) int a^2}; the action factor
    exp{-(2/hbar) S2}; the endpoint bracket; and the integral bracket.
    ``log_density_propagator`` is log |amplitude|^2 from the propagator route.
    """

    density: float
    log_density: float
    factors: dict
    log_density_propagator: float
    mean_record: float
    approximation: str = MEAN_RECORD_APPROXIMATION

    @property
    def consistency(self):
        return abs(self.log_density - self.log_density_propagator)

    def to_dict(self):
        return {
            "density": self.density if math.isfinite(self.density) else None,
            "log_density": self.log_density,
            "log_density_propagator": self.log_density_propagator,
            "factors": dict(self.factors),
            "mean_record": self.mean_record,
            "approximation": self.approximation,
        }


def prefactor_solution(basis: FundamentalBasis, candidates=8):
    """A zero-free homogeneous solution x = X1 + lam e^{i theta} X2.

    lam rescales X2 to the coefficient's rate; theta is chosen to keep |x|
    away from zero. For a real coefficient theta = pi/2 never vanishes.
    """
    lam = basis.coeff.rate or 1.0 / (basis.t1 - basis.t0)
    t = basis.X1.sample_times(3)
    x1, x2 = basis.X1(t), basis.X2(t)
    best, best_theta = -1.0, None
    thetas = [math.pi / 2] + [k * math.pi / candidates for k in range(candidates) if k * 2 != candidates]
    for theta in thetas:
        mod = np.abs(x1 + lam * np.exp(1j * theta) * x2)
        quality = mod.min() / mod.max()
        if quality > best:
            best, best_theta = quality, theta
        if theta == math.pi / 2 and basis.coeff.is_real:
            break
    w = lam * np.exp(1j * best_theta)
    return SolutionGrid.combine([(1.0, basis.X1), (w, basis.X2)])


def _density(coeffs, record, xprime, xdoubleprime, hbar, tol):
    prop, path = _propagator(coeffs, record, xprime, xdoubleprime, hbar, tol)
    m = coeffs.mass
    xh = prefactor_solution(path.basis)
    a, b = record.tprime, record.tdoubleprime

    def j1(t):
        x = xh(t)
        x1, x2 = x.real, x.imag
        return (x1 * x1 - x2 * x2) / (x1 * x1 + x2 * x2) ** 2

    def j2(t):
        x = xh(t)
        x1, x2 = x.real, x.imag
        return x1 * x2 / (x1 * x1 + x2 * x2) ** 2

    J1 = float(np.sum(panel_integral(j1, xh.nodes)))
    J2 = float(np.sum(panel_integral(j2, xh.nodes)))
    bracket = J1 * J1 + 4.0 * J2 * J2
    if not (math.isfinite(bracket) and bracket > 0):
        raise NonFiniteError("integral bracket")
    ends = float(abs(xh(np.array(a))) ** 2 * abs(xh(np.array(b))) ** 2)
    if not (math.isfinite(ends) and ends > 0):
        raise NonFiniteError("endpoint bracket")

    S2 = path.action.imag
    factors = {
        "normalization": math.log(m / (2.0 * math.pi * abs(hbar))),
        "record": 2.0 * record.log_norm,
        "action": -2.0 * S2 / hbar,
        "endpoints": -0.5 * math.log(ends),
        "integral": -0.5 * math.log(bracket),
    }
    log_density = math.fsum(factors.values())
    if not math.isfinite(log_density):
        raise NonFiniteError("log density")
    log_prop = 2.0 * prop.log_amplitude.real
    if abs(log_density - log_prop) > 1e-6:
        log.warning("probability_density: routes disagree by %.3e in log", abs(log_density - log_prop))
    density = math.exp(log_density) if log_density < 709.0 else math.inf
    return ProbabilityValue(
        density=density,
        log_density=log_density,
        factors=factors,
        log_density_propagator=log_prop,
        mean_record=record.mean,
    )


def probability_density(
    coeffs: EffectiveCoefficients,
    record: MeasurementRecord,
    xprime,
    xdoubleprime,
    consts: PhysicalConstants = SI,
    tol=DEFAULT_TOL,
    convention=1,
) -> ProbabilityValue:
    """Probability density of ``record`` for a path from x' to x''.

    Assembled factor by factor from the real and imaginary parts of a
    zero-free homogeneous solution of the shifted equation and the imaginary
    part S2 of the complex action. Computed in log space.
    """
    if convention not in (1, -1):
        raise ValueError("convention must be +1 or -1")
    return _density(coeffs, record, xprime, xdoubleprime, convention * consts.hbar, tol)


def _sweep_one(args):
    coeffs, record, xprime, xdoubleprime, hbar, tol = args
    return _density(coeffs, record, xprime, xdoubleprime, hbar, tol)


def record_sweep(
    coeffs: EffectiveCoefficients,
    records,
    xprime,
    xdoubleprime,
    consts: PhysicalConstants = SI,
    tol=DEFAULT_TOL,
    jobs=1,
):
    """:func:`probability_density` for every record, in input order."""
    tasks = [(coeffs, r, xprime, xdoubleprime, consts.hbar, tol) for r in records]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_sweep_one, tasks))
    return [_sweep_one(t) for t in tasks]
