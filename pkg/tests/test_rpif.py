import math
import pickle

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from paultrap.errors import DegenerateBVP, ParameterError
from paultrap.model import SCALED, SI, EffectiveCoefficients, PhysicalConstants, from_mathieu_parameters
from paultrap.rpif import (
    UNMONITORED,
    MeasurementRecord,
    action_functional,
    classical_action,
    complex_classical_path,
    effective_shift,
    prefactor_solution,
    probability_density,
    propagator,
    record_sweep,
)

from oracles import harmonic_action, simpson

HARMONIC = EffectiveCoefficients(U=1.0, V=0.0, g=0.0, omega=2.0)
GENERIC = from_mathieu_parameters(1.0, 0.3, g=0.2)


def ramp(t0, t1, da, lo=-0.2, hi=0.3, n=65):
    return MeasurementRecord(t0, t1, da, np.linspace(lo, hi, n))


class TestRecord:
    def test_mean_trapezoid(self):
        rec = MeasurementRecord(0.0, 2.0, 1.0, np.array([0.0, 1.0, 4.0]))
        # trapezoid on [0, 1, 2]: (0 + 1)/2 + (1 + 4)/2 = 3, over T = 2
        assert rec.mean == pytest.approx(1.5)

    def test_log_norm(self):
        rec = MeasurementRecord.constant(0.0, 2.0, 0.5, 0.3)
        assert rec.log_norm == pytest.approx(-(0.09 * 2.0) / (2.0 * 0.25))

    def test_unmonitored_norm(self):
        assert MeasurementRecord.unmonitored(0.0, 1.0, [5.0, 5.0]).log_norm == 0.0

    @pytest.mark.parametrize("bad", [dict(tdoubleprime=0.0), dict(delta_a=0.0), dict(delta_a=-1.0)])
    def test_validation(self, bad):
        kw = dict(tprime=0.0, tdoubleprime=1.0, delta_a=1.0, samples=np.zeros(5))
        kw.update(bad)
        with pytest.raises(ParameterError):
            MeasurementRecord(**kw)

    def test_dict_roundtrip(self):
        rec = ramp(0.0, 1.0, 0.7)
        back = MeasurementRecord.from_dict(rec.to_dict())
        assert back.delta_a == 0.7 and np.array_equal(back.samples, rec.samples)
        doc = MeasurementRecord.unmonitored(0.0, 1.0).to_dict()
        assert doc["delta_a"] == "unmonitored"
        assert MeasurementRecord.from_dict(doc).delta_a is UNMONITORED

    def test_sentinel_pickles(self):
        assert pickle.loads(pickle.dumps(UNMONITORED)) is UNMONITORED


class TestShift:
    def test_unmonitored(self):
        assert effective_shift(1.0, MeasurementRecord.unmonitored(0.0, 1.0), SCALED) == 0

    def test_unit(self):
        assert effective_shift(1.0, MeasurementRecord.constant(0.0, 1.0, 1.0, 0.0), SCALED) == -2j

    def test_si_magnitude(self):
        k = effective_shift(1e-25, MeasurementRecord.constant(0.0, 1e-3, 1e-6, 0.0), SI)
        # 2 hbar / (m T da^2) = 2 * 1.054571817e-34 / 1e-40
        assert k.real == 0
        assert abs(k) == pytest.approx(2.109143634e6, rel=1e-9)


class TestPath:
    def test_harmonic_sine(self):
        rec = MeasurementRecord.unmonitored(0.0, np.pi / 2)
        p = complex_classical_path(HARMONIC, rec, 0.0, 1.0, SCALED)
        t = np.linspace(0, np.pi / 2, 101)
        assert np.max(np.abs(p.path(t) - np.sin(t))) < 1e-9
        assert np.max(np.abs(p.x2(t))) < 1e-12
        assert abs(p.action) < 1e-9

    def test_null(self):
        rec = MeasurementRecord.constant(0.0, 1.5, 0.8, 0.0)
        p = complex_classical_path(HARMONIC, rec, 0.0, 0.0, SCALED)
        assert np.max(np.abs(p.path(p.path.sample_times(3)))) == 0.0
        assert classical_action(p, HARMONIC) == 0

    @pytest.mark.parametrize("seed", range(3))
    def test_generic_complex(self, seed):
        rng = np.random.default_rng(seed)
        coeffs = from_mathieu_parameters(rng.uniform(0.5, 1.5), rng.uniform(0, 0.4), g=rng.uniform(-1, 1))
        T = rng.uniform(0.5, 2.5)
        rec = ramp(0.0, T, rng.uniform(0.3, 2.0))
        xa, xb = rng.uniform(-1, 1, 2)
        p = complex_classical_path(coeffs, rec, xa, xb, SCALED)
        t = p.path.sample_times(3)
        scale = np.max(np.abs(p.basis.coeff(t) * p.path(t))) + abs(p.forcing)
        assert p.residual(3) <= 1e-7 * scale
        assert abs(p.path(0.0) - xa) < 1e-9 and abs(p.path(T) - xb) < 1e-9
        assert abs(p.x2(0.0)) < 1e-9 and abs(p.x2(T)) < 1e-9

    def test_caustic(self):
        rec = MeasurementRecord.unmonitored(0.0, np.pi)
        with pytest.raises(DegenerateBVP) as exc:
            complex_classical_path(HARMONIC, rec, 0.0, 1.0, SCALED)
        assert exc.value.interval == (0.0, np.pi)


class TestAction:
    @pytest.mark.parametrize("m, w, xa, xb, T", [(1.0, 1.0, 0.3, -0.4, 1.0), (2.0, 1.5, 1.0, 0.2, 0.8)])
    def test_harmonic_closed_form(self, m, w, xa, xb, T):
        coeffs = EffectiveCoefficients(U=w * w, V=0.0, g=0.0, omega=2.0, mass=m)
        p = complex_classical_path(coeffs, MeasurementRecord.unmonitored(0.0, T), xa, xb, SCALED)
        assert p.action.real == pytest.approx(harmonic_action(m, w, xa, xb, T), abs=1e-10)

    @pytest.mark.parametrize("monitored", [False, True])
    def test_stationarity(self, monitored):
        T = 1.7
        rec = ramp(0.0, T, 0.6) if monitored else MeasurementRecord.unmonitored(0.0, T)
        p = complex_classical_path(GENERIC, rec, 0.4, -0.3, SCALED)
        path = p.path
        k = np.pi / T

        def perturbed(eps):
            v = lambda t: path(t) + eps * np.sin(k * t)  # noqa: E731
            s = lambda t: path.derivative(t) + eps * k * np.cos(k * t)  # noqa: E731
            return action_functional(GENERIC, p.kappa, p.forcing, v, s, path.nodes)

        s0 = perturbed(0.0)
        eps = np.array([1e-2, 3e-3, 1e-3, 3e-4, 1e-4])
        ds = np.array([abs(perturbed(e) - s0) for e in eps])
        slope = np.polyfit(np.log(eps), np.log(ds), 1)[0]
        assert slope == pytest.approx(2.0, abs=0.1)


class TestPropagator:
    @pytest.mark.parametrize("T", [0.5, 1.0, 2.5])
    def test_harmonic_modulus(self, T):
        prop = propagator(HARMONIC, MeasurementRecord.unmonitored(0.0, T), 0.2, 0.7, SCALED)
        assert abs(prop.prefactor) ** 2 == pytest.approx(1 / (2 * np.pi * abs(np.sin(T))), rel=1e-9)
        assert prop.record_norm == 1.0

    def test_amplitude_assembly(self):
        prop = propagator(GENERIC, ramp(0.0, 1.3, 0.9), 0.1, 0.2, SCALED)
        expect = prop.prefactor * np.exp(1j * prop.phase_action) * prop.record_norm
        assert prop.amplitude == pytest.approx(expect, rel=1e-12)

    @pytest.mark.parametrize("monitored", [False, True])
    def test_prefactor_via_quadrature(self, monitored):
        T = 1.2
        rec = ramp(0.0, T, 0.8) if monitored else MeasurementRecord.unmonitored(0.0, T)
        p = complex_classical_path(GENERIC, rec, 0.1, 0.2, SCALED)
        xh = prefactor_solution(p.basis)
        d_quad = xh(0.0) * xh(T) * simpson(lambda t: xh(t) ** -2, 0.0, T, 4001)
        assert d_quad == pytest.approx(p.d_value, rel=1e-7)
        pref = np.sqrt(1.0 / (2j * np.pi * d_quad))
        assert pref == pytest.approx(propagator(GENERIC, rec, 0.1, 0.2, SCALED).prefactor, rel=1e-7)

    def test_convention_conjugates(self):
        rec = ramp(0.0, 1.1, 0.7)
        p = propagator(GENERIC, rec, 0.3, -0.2, SCALED)
        q = propagator(GENERIC, rec, 0.3, -0.2, SCALED, convention=-1)
        assert q.amplitude == pytest.approx(np.conj(p.amplitude), rel=1e-9)
        d1 = probability_density(GENERIC, rec, 0.3, -0.2, SCALED)
        d2 = probability_density(GENERIC, rec, 0.3, -0.2, SCALED, convention=-1)
        assert d2.density == pytest.approx(d1.density, rel=1e-9)


class TestDensity:
    def test_routes_agree(self):
        rng = np.random.default_rng(3)
        for _ in range(5):
            coeffs = from_mathieu_parameters(rng.uniform(0.3, 1.5), rng.uniform(0, 0.5), g=rng.uniform(-1, 1))
            rec = ramp(0.0, rng.uniform(0.4, 2.0), rng.uniform(0.3, 3.0))
            d = probability_density(coeffs, rec, *rng.uniform(-1, 1, 2), SCALED)
            assert d.consistency <= 1e-6 * max(1.0, abs(d.log_density))
            assert math.fsum(d.factors.values()) == pytest.approx(d.log_density)

    @settings(max_examples=40, deadline=None)
    @given(
        st.floats(0.2, 2.0), st.floats(0.0, 0.6), st.floats(-2, 2), st.floats(0.3, 2.0),
        st.floats(0.2, 5.0), st.floats(-1, 1), st.floats(-1, 1), st.floats(-1, 1),
    )
    def test_nonnegative(self, a, q, g, T, da, xa, xb, level):
        rec = MeasurementRecord.constant(0.0, T, da, level)
        try:
            d = probability_density(from_mathieu_parameters(a, q, g=g), rec, xa, xb, SCALED)
        except DegenerateBVP:
            return
        assert d.density >= 0 and math.isfinite(d.log_density)

    def test_resolution_scaling(self):
        def dependence(da):
            a = probability_density(GENERIC, MeasurementRecord.constant(0.0, 2.0, da, 0.1), 0.3, -0.1, SCALED)
            b = probability_density(GENERIC, ramp(0.0, 2.0, da), 0.3, -0.1, SCALED)
            return abs(a.log_density - b.log_density)

        assert dependence(4.0) / dependence(8.0) == pytest.approx(4.0, rel=0.1)
        assert dependence(4.0) / dependence(40.0) == pytest.approx(100.0, rel=0.1)

    def test_unmonitored_record_independent(self):
        a = probability_density(GENERIC, MeasurementRecord.unmonitored(0.0, 2.0, [0.0, 0.0]), 0.3, -0.1, SCALED)
        b = probability_density(GENERIC, MeasurementRecord.unmonitored(0.0, 2.0, [3.0, -1.0, 2.0]), 0.3, -0.1, SCALED)
        assert a.density / b.density == 1.0

    def test_most_probable_record_is_classical(self):
        T, xa, xb = 2.0, 0.3, -0.1
        free = complex_classical_path(GENERIC, MeasurementRecord.unmonitored(0.0, T), xa, xb, SCALED)
        mean = simpson(lambda t: free.path(t).real, 0.0, T, 4001) / T
        levels = np.linspace(-0.2, 0.8, 101)
        rows = record_sweep(GENERIC, [MeasurementRecord.constant(0.0, T, 2.0, c) for c in levels], xa, xb, SCALED)
        ld = np.array([r.log_density for r in rows])
        assert abs(levels[np.argmax(ld)] - mean) <= 0.01


class TestSweep:
    def test_empty(self):
        assert record_sweep(GENERIC, [], 0.0, 0.0, SCALED) == []

    def test_single(self):
        rec = ramp(0.0, 1.0, 1.0)
        (row,) = record_sweep(GENERIC, [rec], 0.1, 0.2, SCALED)
        assert row == probability_density(GENERIC, rec, 0.1, 0.2, SCALED)

    def test_unimodal(self):
        levels = np.linspace(-1.0, 1.0, 101)
        rows = record_sweep(GENERIC, [MeasurementRecord.constant(0.0, 1.5, 0.7, c) for c in levels], 0.2, 0.1, SCALED)
        ld = np.array([r.log_density for r in rows])
        i = int(np.argmax(ld))
        assert 0 < i < 100
        assert np.all(np.diff(ld[: i + 1]) > 0) and np.all(np.diff(ld[i:]) < 0)

    def test_parallel_order(self):
        recs = [MeasurementRecord.constant(0.0, 1.0, 1.0, c) for c in (0.0, 0.5, -0.5)]
        serial = record_sweep(GENERIC, recs, 0.1, 0.2, SCALED)
        assert record_sweep(GENERIC, recs, 0.1, 0.2, SCALED, jobs=2) == serial


def test_si_units_log_space():
    consts = PhysicalConstants()
    coeffs = EffectiveCoefficients(U=4e10, V=1e10, g=9.8, omega=4e5, mass=1e-25)
    rec = MeasurementRecord.constant(0.0, 1e-5, 1e-6, 1e-7)
    d = probability_density(coeffs, rec, 0.0, 2e-7, consts)
    assert math.isfinite(d.log_density)
    assert d.consistency <= 1e-6 * max(1.0, abs(d.log_density))
