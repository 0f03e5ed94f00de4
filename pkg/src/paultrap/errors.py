"""Exception types raised by paultrap."""


class ParameterError(ValueError):
    """Invalid input parameter. ``key`` names the offending field."""

    def __init__(self, key, message):
        self.key = key
        super().__init__(f"{key}: {message}")


class NumericalError(RuntimeError):
    """Base class for failures of the numerical machinery."""


class IntegrationError(NumericalError):
    """The ODE integrator could not advance past ``time``."""

    def __init__(self, time, message):
        self.time = time
        super().__init__(f"integration failed at t={time!r}: {message}")


class ZeroCrossing(NumericalError):
    """A solution used in a 1/X**2 integral vanishes at ``time``."""

    def __init__(self, time):
        self.time = time
        super().__init__(f"solution crosses zero at t={time!r} inside a 1/X^2 integral")


class DegenerateBVP(NumericalError):
    """Boundary value problem is singular (caustic) on ``interval``."""

    def __init__(self, interval, d_value):
        self.interval = interval
        self.d_value = d_value
        super().__init__(
            f"degenerate boundary value problem on {interval!r}: |D| = {abs(d_value):.3e}"
        )


class PoleDetected(NumericalError):
    """Ratio is singular at ``times`` not covered by the pole exclusion."""

    def __init__(self, times):
        self.times = list(times)
        super().__init__(f"unflagged poles near t = {self.times!r}")


class NonFiniteError(NumericalError):
    def __init__(self, what):
        self.what = what
        super().__init__(f"non-finite value in {what}")
