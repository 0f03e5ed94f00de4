import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from paultrap.errors import IntegrationError
from paultrap.mathieu import (
    CoefficientFunction,
    classify,
    d_function,
    fundamental_basis,
    integrate,
    monodromy,
    stability,
    stability_scan,
    zeros,
)

from oracles import A0_Q01, TRACE_A1_Q05, a0_series, rk4_fundamental, simpson

HARMONIC = CoefficientFunction(1.0)


def test_cosine():
    x = integrate(HARMONIC, 0.0, np.pi, 1.0, 0.0)
    assert x(np.pi) == pytest.approx(-1.0, abs=1e-8)


def test_free_particle():
    x = integrate(CoefficientFunction(0.0), 0.0, 3.0, 0.0, 1.0)
    t = np.linspace(0, 3, 31)
    assert np.max(np.abs(x(t) - t)) < 1e-12
    assert np.max(np.abs(x.derivative(t) - 1)) < 1e-12


def test_grid_endpoints_and_ordering():
    x = integrate(HARMONIC, 0.5, 2.0, 1.0, 0.0)
    assert x.nodes[0] == 0.5 and x.nodes[-1] == 2.0
    assert np.all(np.diff(x.nodes) > 0)


def test_residual_within_tolerance():
    coeff = CoefficientFunction.from_mathieu(0.7, 0.4)
    x = integrate(coeff, 0.0, 20.0, 1.0, 0.3, tol=1e-8)
    assert x.meta["residual"] <= 1e-8 * x.meta["residual_scale"]


@pytest.mark.parametrize("tol", [0.0, -1e-9, 2e-3])
def test_tolerance_domain(tol):
    with pytest.raises(ValueError):
        integrate(HARMONIC, 0.0, 1.0, 1.0, 0.0, tol=tol)


def test_needs_forward_interval():
    with pytest.raises(ValueError):
        integrate(HARMONIC, 1.0, 1.0, 1.0, 0.0)


def test_integration_failure_reports_time(monkeypatch):
    import paultrap.mathieu as mod

    class Failed:
        status = -1
        message = "step size underflow"
        t = np.array([0.0, 0.25])

    monkeypatch.setattr(mod, "solve_ivp", lambda *a, **k: Failed())
    with pytest.raises(IntegrationError) as exc:
        integrate(HARMONIC, 0.0, 1.0, 1.0, 0.0)
    assert exc.value.time == 0.25


def test_monodromy_trace_oracle():
    M = monodromy(CoefficientFunction.from_mathieu(1.0, 0.5))
    assert np.trace(M) == pytest.approx(TRACE_A1_Q05, abs=1e-7)


def test_monodromy_against_rk4_matrix():
    ref = rk4_fundamental(1.0, 0.5, np.pi, 4000)
    M = monodromy(CoefficientFunction.from_mathieu(1.0, 0.5))
    assert np.max(np.abs(M - ref)) < 1e-8


class TestBasis:
    def test_harmonic(self):
        b = fundamental_basis(HARMONIC, 0.0, 20 * np.pi)
        t = np.linspace(0, 20 * np.pi, 2001)
        assert np.max(np.abs(b.X1(t) - np.cos(t))) < 1e-8
        assert np.max(np.abs(b.X2(t) - np.sin(t))) < 1e-8
        assert b.wronskian == pytest.approx(1.0, abs=1e-15)

    @pytest.mark.parametrize("kappa", [0.0, 0.1j, -0.3j])
    def test_wronskian_constant(self, kappa):
        coeff = CoefficientFunction.from_mathieu(0.5, 0.3, kappa=kappa)
        b = fundamental_basis(coeff, 0.0, 15.0)
        t = b.X1.sample_times(3)
        w = b.wronskian_at(t)
        assert np.max(np.abs(w - b.wronskian)) / abs(b.wronskian) < 1e-8
        assert b.wronskian_drift < 1e-8

    def test_initial_data(self):
        b = fundamental_basis(CoefficientFunction.from_mathieu(2.0, 0.8), 1.0, 4.0)
        assert (b.X1(1.0), b.X1.derivative(1.0)) == (pytest.approx(1.0), pytest.approx(0.0, abs=1e-15))
        assert (b.X2(1.0), b.X2.derivative(1.0)) == (pytest.approx(0.0, abs=1e-15), pytest.approx(1.0))


class TestStability:
    def test_constant_stable(self):
        v = stability(CoefficientFunction.from_mathieu(0.1, 0.0))
        expected = np.exp(1j * np.sqrt(0.1) * np.pi)
        assert v.classification == "stable"
        assert sorted(np.angle(v.multipliers)) == pytest.approx(
            [-np.angle(expected), np.angle(expected)], abs=1e-9
        )
        assert v.moduli == pytest.approx((1.0, 1.0), abs=1e-9)

    def test_inverted_unstable(self):
        assert stability(CoefficientFunction.from_mathieu(-0.1, 0.0)).classification == "unstable"

    @pytest.mark.parametrize("a, q", [(1.0, 0.5), (0.3, 0.2), (-0.5, 0.7), (2.5, 1.3)])
    def test_multiplier_product_one(self, a, q):
        v = stability(CoefficientFunction.from_mathieu(a, q))
        assert v.multipliers[0] * v.multipliers[1] == pytest.approx(1.0, rel=1e-8)

    def test_rejects_complex_shift(self):
        with pytest.raises(ValueError):
            stability(CoefficientFunction.from_mathieu(1.0, 0.1, kappa=0.1j))

    def test_classify_thresholds(self):
        assert classify(np.array([1 + 2e-9, 1 / (1 + 2e-9)])) == "unstable"
        assert classify(np.array([-1.0, -1.0])) == "marginal"
        assert classify(np.exp([0.3j, -0.3j])) == "stable"

    def test_boundary_bisection_small_q(self):
        q = 0.1

        def unstable(a):
            return stability(CoefficientFunction.from_mathieu(a, q)).classification == "unstable"

        lo, hi = -0.05, 0.05
        assert unstable(lo) and not unstable(hi)
        for _ in range(30):
            mid = 0.5 * (lo + hi)
            lo, hi = (mid, hi) if unstable(mid) else (lo, mid)
        a0 = 0.5 * (lo + hi)
        assert a0 == pytest.approx(a0_series(q), abs=1e-3)
        assert a0 == pytest.approx(A0_Q01, abs=1e-3)
        assert a0 == pytest.approx(-q * q / 2, abs=1e-3)

    @pytest.mark.parametrize("q", [0.1, 0.3])
    def test_first_band(self, q):
        # small-q edges of the first instability band: b1 = 1 - q - q^2/8, a1 = 1 + q - q^2/8
        b1, a1 = 1 - q - q * q / 8, 1 + q - q * q / 8
        classify_at = lambda a: stability(CoefficientFunction.from_mathieu(a, q)).classification  # noqa: E731
        assert classify_at(1.0) == "unstable"
        assert classify_at(b1 - 0.02) == "stable" and classify_at(a1 + 0.02) == "stable"

    def test_scan_order_and_shape(self):
        rows = stability_scan([0.1, -0.1], [0.0, 0.2, 0.4])
        assert [(r[0], r[1]) for r in rows] == [(a, q) for a in (0.1, -0.1) for q in (0.0, 0.2, 0.4)]
        assert all(r[2] >= r[3] for r in rows)
        assert rows[3][4] == "unstable"

    def test_scan_parallel_matches_serial(self):
        a, q = [0.2, 1.1], [0.1, 0.9]
        assert stability_scan(a, q, jobs=2) == stability_scan(a, q)


class TestDFunction:
    def test_harmonic(self):
        assert d_function(HARMONIC, 0.0, np.pi / 2) == pytest.approx(1.0, abs=1e-8)

    @pytest.mark.parametrize("h", [1e-2, 1e-3, 1e-4])
    def test_short_time(self, h):
        coeff = CoefficientFunction.from_mathieu(1.3, 0.6)
        assert d_function(coeff, 0.4, 0.4 + h) == pytest.approx(h, rel=2 * h * h)

    @pytest.mark.parametrize("kappa", [0.0, 0.2j])
    def test_backward_symmetry(self, kappa):
        coeff = CoefficientFunction.from_mathieu(0.8, 0.35, kappa=kappa)
        fwd = d_function(coeff, 0.3, 2.1)
        bwd = d_function(coeff, 2.1, 0.3)
        assert abs(fwd + bwd) < 1e-8 * abs(fwd)

    def test_integral_form(self):
        rng = np.random.default_rng(7)
        for _ in range(5):
            a, q = rng.uniform(0.2, 1.2), rng.uniform(0.0, 0.5)
            coeff = CoefficientFunction.from_mathieu(a, q)
            b = fundamental_basis(coeff, 0.0, 6.0)
            x = b.solution(1.0, 2.0)
            # the two ends of the first zero-free stretch
            z = zeros(x)
            t1, t2 = 0.0, (z[0] if len(z) else 6.0) * 0.8
            integral = simpson(lambda t: x(t) ** -2, t1, t2, 2001)
            d_quad = x(t1) * x(t2) * integral
            assert d_function(coeff, t1, t2) == pytest.approx(d_quad, rel=1e-7)


def test_zeros_of_cosine():
    x = integrate(HARMONIC, 0.0, 10.0, 1.0, 0.0)
    assert zeros(x) == pytest.approx(np.pi / 2 + np.pi * np.arange(3), abs=1e-10)


@settings(max_examples=25, deadline=None)
@given(
    st.floats(-0.5, 2.0), st.floats(0.0, 1.0),
    st.floats(-2, 2), st.floats(-2, 2), st.floats(-2, 2), st.floats(-2, 2),
    st.floats(-3, 3), st.floats(-3, 3),
)
def test_superposition(a, q, x1, v1, x2, v2, alpha, beta):
    coeff = CoefficientFunction.from_mathieu(a, q)
    g1 = integrate(coeff, 0.0, 6.0, x1, v1)
    g2 = integrate(coeff, 0.0, 6.0, x2, v2)
    g = integrate(coeff, 0.0, 6.0, alpha * x1 + beta * x2, alpha * v1 + beta * v2)
    t = np.linspace(0, 6, 61)
    lhs = g(t)
    rhs = alpha * g1(t) + beta * g2(t)
    scale = np.max(np.abs(alpha * g1(t))) + np.max(np.abs(beta * g2(t))) + 1e-300
    assert np.max(np.abs(lhs - rhs)) <= 1e-9 * scale


@settings(max_examples=25, deadline=None)
@given(
    st.floats(-0.5, 2.0), st.floats(0.0, 1.0), st.floats(-1.0, 1.0),
    st.complex_numbers(max_magnitude=2), st.complex_numbers(max_magnitude=2),
)
def test_conjugation(a, q, k, x0, v0):
    coeff = CoefficientFunction.from_mathieu(a, q, kappa=1j * k)
    x = integrate(coeff, 0.0, 5.0, x0, v0)
    y = integrate(coeff.conjugate(), 0.0, 5.0, np.conj(x0), np.conj(v0))
    t = np.linspace(0, 5, 51)
    scale = np.max(np.abs(x(t))) + 1e-300
    assert np.max(np.abs(np.conj(x(t)) - y(t))) <= 1e-9 * scale
