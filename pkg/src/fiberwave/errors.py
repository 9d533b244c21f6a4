"""Exception types shared across the package."""


class FiberwaveError(Exception):
    """Base class for all package errors."""


class ValidationError(FiberwaveError, ValueError):
    """Invalid input: bad spin label, malformed scenario, non-unit axis, ...

    ``field`` names the offending input when one can be identified.
    """

    def __init__(self, message, field=None):
        self.field = field
        if field is not None:
            message = f"{field}: {message}"
        super().__init__(message)


class DomainError(FiberwaveError, ValueError):
    """A requested time lies outside the domain of a guide path."""


class DegenerateTangentError(FiberwaveError, ValueError):
    """The path velocity vanishes, so the tangent direction is undefined."""

    def __init__(self, t, speed):
        self.t = float(t)
        super().__init__(f"degenerate tangent at t={self.t!r} (|dr/dt|={speed:.3e})")


class PolePassageError(FiberwaveError):
    """The wave-vector direction crosses a pole of the working frame mid-run.

    The azimuth, and with it the phase integrand, is undefined there.
    """

    def __init__(self, t, sin_theta):
        self.t = float(t)
        self.sin_theta = float(sin_theta)
        super().__init__(
            f"pole passage at t={self.t!r} (sin(theta)={self.sin_theta:.3e}); "
            "azimuth continuation is ambiguous"
        )
