"""Trap parameters, gravity-shifted coefficients and the environment estimate.

The monitored coordinate x is vertical (pointing away from the source mass).
Expanding the source field to second order about the trap centre gives::

    x'' + [U - V cos(w t)] x + g = 0,
    U = e Ubar / (m r^2) - 2 g / R,   V = e Vbar / (m r^2),   g = G M / R^2.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields

import numpy as np

from .errors import ParameterError

__all__ = [
    "PhysicalConstants",
    "SI",
    "SCALED",
    "TrapInput",
    "EffectiveCoefficients",
    "MathieuParameters",
    "EnvironmentReport",
    "derive_coefficients",
    "to_mathieu_parameters",
    "from_mathieu_parameters",
    "environment_report",
]


@dataclass(frozen=True)
class PhysicalConstants:
    hbar: float = 1.054571817e-34
    G: float = 6.67430e-11

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            if not (math.isfinite(value) and value > 0):
                raise ParameterError(f.name, f"must be a positive finite number, got {value!r}")

    @classmethod
    def scaled(cls) -> "PhysicalConstants":
        """Dimensionless units with hbar = G = 1."""
        return cls(hbar=1.0, G=1.0)


SI = PhysicalConstants()
SCALED = PhysicalConstants.scaled()


@dataclass(frozen=True)
class TrapInput:
    """Hardware and source parameters, SI units.

    ``half_distance`` is r, with 2r the electrode separation. The dc and ac
    amplitudes enter only through the combination charge / (mass r^2).
    """

    charge: float
    mass: float
    half_distance: float
    dc_amplitude: float
    ac_amplitude: float
    omega: float
    source_mass: float
    source_distance: float

    def validate(self):
        for f in fields(self):
            value = getattr(self, f.name)
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ParameterError(f.name, f"must be a number, got {value!r}")
            if not math.isfinite(value):
                raise ParameterError(f.name, f"must be finite, got {value!r}")
        for key in ("mass", "half_distance", "omega", "source_distance"):
            if getattr(self, key) <= 0:
                raise ParameterError(key, f"must be > 0, got {getattr(self, key)!r}")
        if self.source_mass < 0:
            raise ParameterError("source_mass", f"must be >= 0, got {self.source_mass!r}")
        return self

    @classmethod
    def from_dict(cls, doc) -> "TrapInput":
        if not isinstance(doc, dict):
            raise ParameterError("trap", "must be a JSON object")
        names = [f.name for f in fields(cls)]
        for key in doc:
            if key not in names:
                raise ParameterError(key, "unknown trap parameter")
        for key in names:
            if key not in doc:
                raise ParameterError(key, "missing trap parameter")
        return cls(**{k: doc[k] for k in names}).validate()

    def to_dict(self):
        return asdict(self)


@dataclass(frozen=True)
class EffectiveCoefficients:
    """Coefficients of x'' + [U - V cos(omega t)] x + g = 0."""

    U: float
    V: float
    g: float
    omega: float
    mass: float = 1.0

    def __post_init__(self):
        if not self.omega > 0:
            raise ParameterError("omega", f"must be > 0, got {self.omega!r}")
        if not self.mass > 0:
            raise ParameterError("mass", f"must be > 0, got {self.mass!r}")

    @classmethod
    def from_dict(cls, doc) -> "EffectiveCoefficients":
        if not isinstance(doc, dict):
            raise ParameterError("coefficients", "must be a JSON object")
        allowed = {"U", "V", "g", "omega", "mass"}
        for key in doc:
            if key not in allowed:
                raise ParameterError(key, "unknown coefficient")
        for key in ("U", "V", "omega"):
            if key not in doc:
                raise ParameterError(key, "missing coefficient")
        values = {}
        for key in allowed & doc.keys():
            value = doc[key]
            if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
                raise ParameterError(key, f"must be a finite number, got {value!r}")
            values[key] = float(value)
        values.setdefault("g", 0.0)
        return cls(**values)

    def to_dict(self):
        return asdict(self)

    def coefficient(self, t):
        """U - V cos(omega t)."""
        return self.U - self.V * np.cos(self.omega * np.asarray(t))


@dataclass(frozen=True)
class MathieuParameters:
    """Standard form y'' + (a - 2 q cos 2 tau) y = 0 with tau = omega t / 2."""

    a: float
    q: float


def derive_coefficients(inp: TrapInput, consts: PhysicalConstants = SI, axis: str = "x") -> EffectiveCoefficients:
    """Effective coefficients of the monitored equation of motion.

    ``axis="z"`` gives the horizontal channel: the electric coefficients
    change sign and no gravity terms enter (the source field is along x).
    """
    inp.validate()
    scale = inp.charge / (inp.mass * inp.half_distance**2)
    if axis == "z":
        return EffectiveCoefficients(
            U=-scale * inp.dc_amplitude, V=-scale * inp.ac_amplitude, g=0.0, omega=inp.omega, mass=inp.mass
        )
    if axis != "x":
        raise ParameterError("axis", f"must be 'x' or 'z', got {axis!r}")
    g = consts.G * inp.source_mass / inp.source_distance**2
    return EffectiveCoefficients(
        U=scale * inp.dc_amplitude - 2.0 * g / inp.source_distance,
        V=scale * inp.ac_amplitude,
        g=g,
        omega=inp.omega,
        mass=inp.mass,
    )


def to_mathieu_parameters(c: EffectiveCoefficients) -> MathieuParameters:
    w2 = c.omega**2
    return MathieuParameters(a=4.0 * c.U / w2, q=2.0 * c.V / w2)


def from_mathieu_parameters(a, q, omega=2.0, g=0.0, mass=1.0) -> EffectiveCoefficients:
    """Inverse of :func:`to_mathieu_parameters`. With omega=2, t coincides with tau."""
    w2 = omega**2
    return EffectiveCoefficients(U=a * w2 / 4.0, V=q * w2 / 2.0, g=g, omega=omega, mass=mass)


@dataclass(frozen=True)
class EnvironmentReport:
    """Potentials per unit trap-particle mass (m^2/s^2).

    ``third_order`` is g x^3 / R^2, the first term of the source expansion
    left out of the Hamiltonian; ``neighbor`` is G m_nb / d for a nearby
    mass. ``ratio`` is neighbor / third_order. No verdict is implied.
    """

    third_order: float
    neighbor: float
    ratio: float
    g: float
    excursion: float
    source_distance: float
    neighbor_mass: float
    neighbor_distance: float

    @property
    def orders_of_magnitude_apart(self):
        if self.ratio == 0 or not math.isfinite(self.ratio) or math.isnan(self.ratio):
            return math.inf
        return abs(math.log10(self.ratio))

    def to_dict(self):
        d = asdict(self)
        d["orders_of_magnitude_apart"] = self.orders_of_magnitude_apart
        return d


def environment_report(inp: TrapInput, excursion, neighbor_mass, neighbor_distance, consts: PhysicalConstants = SI):
    inp.validate()
    if not neighbor_distance > 0:
        raise ParameterError("neighbor_distance", f"must be > 0, got {neighbor_distance!r}")
    if neighbor_mass < 0:
        raise ParameterError("neighbor_mass", f"must be >= 0, got {neighbor_mass!r}")
    R = inp.source_distance
    g = consts.G * inp.source_mass / R**2
    third = abs(g * excursion**3 / R**2)
    neighbor = consts.G * neighbor_mass / neighbor_distance
    if third > 0:
        ratio = neighbor / third
    else:
        ratio = math.nan if neighbor == 0 else math.inf
    return EnvironmentReport(
        third_order=third,
        neighbor=neighbor,
        ratio=ratio,
        g=g,
        excursion=excursion,
        source_distance=R,
        neighbor_mass=neighbor_mass,
        neighbor_distance=neighbor_distance,
    )
