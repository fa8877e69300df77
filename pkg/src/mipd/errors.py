"""Exception types shared across the package."""


class MipdError(Exception):
    """Base class for all package-specific errors."""


class EnumerationTooLarge(MipdError):
    """Brute-force enumeration requested for more sequences than supported."""


class MatrixExpOverflow(MipdError):
    """Matrix norm exceeds the certified range of the exponential."""


class DegenerateProbability(MipdError):
    """A computed branch probability fell outside [0, 1] beyond rounding."""


class UndefinedSignal(MipdError):
    """|z| is below the numeric floor, so alpha and chi are undefined."""


class IllDefinedPath(MipdError):
    """Phase unwrapping hit the |z| floor; the winding number is undefined."""


class NoConvergence(MipdError):
    """Root search failed to reach the residual target.

    Carries the best iterate found so that callers can inspect or reseed.
    """

    def __init__(self, message, best=None, residual=None):
        super().__init__(message)
        self.best = best
        self.residual = residual


class OutOfDomain(MipdError):
    """Root search iterate left theta in [0, pi] or C >= 0."""


class ContinuationStalled(MipdError):
    """Critical-line continuation could not advance past the last good point.

    Carries the points accepted so far.
    """

    def __init__(self, message, points=()):
        super().__init__(message)
        self.points = list(points)


class SymmetryViolation(MipdError):
    """A symmetry identity of the averaged signal failed beyond tolerance."""

    def __init__(self, message, params=None, deviation=None):
        super().__init__(message)
        self.params = params
        self.deviation = deviation
