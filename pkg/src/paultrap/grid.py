"""Sampled solutions with dense output, and Gauss-Legendre panel quadrature.

A :class:`SolutionGrid` carries value and slope at the accepted integrator
steps together with vectorised callables for value, slope and second
derivative anywhere in the interval. Quadratures run panel by panel over the
step breakpoints, where the dense output is smooth.
"""
from __future__ import annotations

import numpy as np
from numpy.polynomial import chebyshev as cheb
from numpy.polynomial.legendre import leggauss

__all__ = [
    "SolutionGrid",
    "ChebyshevPieces",
    "GL_ORDER",
    "panel_integral",
    "cumulative_integral",
    "antiderivative",
    "panel_points",
]

GL_ORDER = 7
_GL_X, _GL_W = leggauss(GL_ORDER)


class ChebyshevPieces:
    """Piecewise Chebyshev polynomials on ``breaks``.

    ``coefs`` has shape (n_pieces, degree + 1, ...) with the trailing axes
    indexing components.
    """

    def __init__(self, breaks, coefs):
        self.breaks = np.asarray(breaks, dtype=float)
        self.coefs = np.asarray(coefs)
        self._h = np.diff(self.breaks)

    @classmethod
    def fit(cls, breaks, func, degree):
        """Interpolate ``func`` at Chebyshev-Lobatto points of every piece.

        Exact (to rounding) when ``func`` is piecewise polynomial of degree
        ``degree`` on these breaks, as the integrator's dense output is.
        """
        breaks = np.asarray(breaks, dtype=float)
        s = cheb.chebpts2(degree + 1)
        h = np.diff(breaks)
        pts = breaks[:-1, None] + 0.5 * (s[None, :] + 1.0) * h[:, None]
        # func maps (m,) times -> (ncomp, m) values
        vals = np.asarray(func(pts.ravel()))
        vals = vals.reshape(vals.shape[0], len(h), degree + 1)
        vinv = np.linalg.inv(cheb.chebvander(s, degree))
        coefs = np.einsum("ij,knj->nik", vinv, vals)
        return cls(breaks, coefs)

    def derivative(self):
        d = cheb.chebder(self.coefs, axis=1) * (2.0 / self._h)[:, None, None]
        return ChebyshevPieces(self.breaks, d)

    def component(self, k):
        return ChebyshevPieces(self.breaks, self.coefs[:, :, k : k + 1])

    def __call__(self, t):
        """Evaluate at ``t`` (any shape); returns shape t.shape + (ncomp,)."""
        t = np.asarray(t, dtype=float)
        flat = t.ravel()
        n = len(self._h)
        idx = np.clip(np.searchsorted(self.breaks, flat, side="right") - 1, 0, n - 1)
        s = 2.0 * (flat - self.breaks[idx]) / self._h[idx] - 1.0
        c = self.coefs[idx]  # (m, deg+1, ncomp)
        # Clenshaw, vectorised over points and components
        b1 = np.zeros(c[:, 0, :].shape, dtype=c.dtype)
        b2 = np.zeros_like(b1)
        x2 = (2.0 * s)[:, None]
        for j in range(c.shape[1] - 1, 0, -1):
            b1, b2 = c[:, j, :] + x2 * b1 - b2, b1
        out = c[:, 0, :] + s[:, None] * b1 - b2
        return out.reshape(t.shape + (c.shape[2],))


class SolutionGrid:
    """Value and slope of a scalar solution on an increasing node set.

    Parameters
    ----------
    nodes : array_like
        Strictly increasing times; first and last are the interval ends.
    value, slope, accel : callable
        Vectorised functions of time returning x, x' and x''.
    """

    def __init__(self, nodes, value, slope, accel, **meta):
        nodes = np.asarray(nodes, dtype=float)
        if nodes.ndim != 1 or len(nodes) < 2 or np.any(np.diff(nodes) <= 0):
            raise ValueError("nodes must be a strictly increasing 1-d array with at least two entries")
        self.nodes = nodes
        self.nodes.flags.writeable = False
        self._value = value
        self._slope = slope
        self._accel = accel
        self.value = np.asarray(value(nodes))
        self.slope = np.asarray(slope(nodes))
        self.value.flags.writeable = False
        self.slope.flags.writeable = False
        self.meta = meta

    @property
    def t0(self):
        return float(self.nodes[0])

    @property
    def t1(self):
        return float(self.nodes[-1])

    @property
    def interval(self):
        return (self.t0, self.t1)

    @property
    def is_real(self):
        return not np.iscomplexobj(self.value) or (
            np.all(self.value.imag == 0) and np.all(self.slope.imag == 0)
        )

    def __call__(self, t):
        return self._value(np.asarray(t, dtype=float))

    def derivative(self, t, order=1):
        t = np.asarray(t, dtype=float)
        if order == 0:
            return self._value(t)
        if order == 1:
            return self._slope(t)
        if order == 2:
            return self._accel(t)
        raise ValueError(f"order must be 0, 1 or 2, got {order!r}")

    def sample_times(self, per_panel=1):
        """Nodes plus ``per_panel`` equally spaced interior points per step."""
        if per_panel <= 0:
            return self.nodes.copy()
        h = np.diff(self.nodes)
        frac = np.arange(1, per_panel + 1) / (per_panel + 1)
        inner = self.nodes[:-1, None] + frac[None, :] * h[:, None]
        return np.sort(np.concatenate([self.nodes, inner.ravel()]))

    @classmethod
    def from_functions(cls, nodes, value, slope, accel, **meta):
        """Grid for a closed-form solution."""
        return cls(nodes, value, slope, accel, **meta)

    def map(self, func, **meta):
        """Apply a linear map ``x -> func(x)`` to value, slope and accel."""
        return SolutionGrid(
            self.nodes,
            lambda t: func(self._value(t)),
            lambda t: func(self._slope(t)),
            lambda t: func(self._accel(t)),
            **meta,
        )

    def scaled(self, factor):
        return self.map(lambda x: factor * x, **self.meta)

    def conjugate(self):
        return self.map(np.conj, **self.meta)

    @property
    def real(self):
        return self.map(np.real, **self.meta)

    @property
    def imag(self):
        return self.map(np.imag, **self.meta)

    @staticmethod
    def combine(terms, **meta):
        """Linear combination ``sum(c * grid)`` of grids sharing nodes."""
        terms = [(c, g) for c, g in terms]
        nodes = terms[0][1].nodes
        for _, g in terms[1:]:
            if g.nodes.shape != nodes.shape or np.any(g.nodes != nodes):
                raise ValueError("grids must share nodes to be combined")

        def _lin(order):
            return lambda t: sum(c * g.derivative(t, order) for c, g in terms)

        return SolutionGrid(nodes, _lin(0), _lin(1), _lin(2), **meta)


def panel_points(breaks):
    """Gauss-Legendre points and weights on every panel, shape (n, GL_ORDER)."""
    breaks = np.asarray(breaks, dtype=float)
    h = np.diff(breaks)
    mid = 0.5 * (breaks[:-1] + breaks[1:])
    pts = mid[:, None] + 0.5 * h[:, None] * _GL_X[None, :]
    wts = 0.5 * h[:, None] * _GL_W[None, :]
    return pts, wts


def panel_integral(func, breaks):
    """Integral of ``func`` over each panel, shape (n,)."""
    pts, wts = panel_points(breaks)
    vals = np.asarray(func(pts.ravel())).reshape(pts.shape)
    return np.sum(vals * wts, axis=1)


def cumulative_integral(func, breaks):
    """Integral of ``func`` from breaks[0] to every break."""
    per = panel_integral(func, breaks)
    out = np.zeros(len(per) + 1, dtype=per.dtype)
    np.cumsum(per, out=out[1:])
    return out


def antiderivative(func, breaks):
    """Return ``F`` with F(t) = integral of ``func`` from breaks[0] to t.

    Whole panels come from the cached cumulative sum; the partial panel up to
    ``t`` uses its own Gauss-Legendre rule.
    """
    breaks = np.asarray(breaks, dtype=float)
    cum = cumulative_integral(func, breaks)
    n = len(breaks) - 1

    def F(t):
        t = np.asarray(t, dtype=float)
        flat = t.ravel()
        idx = np.clip(np.searchsorted(breaks, flat, side="right") - 1, 0, n - 1)
        lo = breaks[idx]
        half = 0.5 * (flat - lo)
        pts = (lo + half)[:, None] + half[:, None] * _GL_X[None, :]
        vals = np.asarray(func(pts.ravel())).reshape(pts.shape)
        partial = half * (vals @ _GL_W)
        return (cum[idx] + partial).reshape(t.shape)

    F.cumulative = cum
    return F
