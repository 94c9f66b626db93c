"""
Error hierarchy for the entropic uncertainty solver.

Every error raised by the library derives from :class:`EurBoundsError`, so
callers (the management commands in particular) can catch one type and map it
to an exit code. Argument-validation errors also derive from ``ValueError``.
"""


class EurBoundsError(Exception):
    """Root of all solver errors."""


class DimensionMismatch(EurBoundsError, ValueError):
    """Operands live on Hilbert spaces (or vector spaces) of different size."""


class NotPositive(EurBoundsError, ValueError):
    """A POVM element has an eigenvalue below the positivity tolerance."""


class NotComplete(EurBoundsError, ValueError):
    """POVM elements do not sum to the identity."""


class ConvergenceFailure(EurBoundsError):
    """The dense Hermitian eigensolver did not converge."""


class DegenerateMeasurement(EurBoundsError):
    """
    The outcome distribution does not depend on the state (reduced rank 0).

    Attributes
    ----------
    center : numpy.ndarray
        The state-independent probability vector ``s``.
    """

    def __init__(self, center, message="outcome probabilities are state-independent"):
        super().__init__(message)
        self.center = center


class Unbounded(EurBoundsError):
    """A half-space system does not describe a bounded polytope."""


class EmptyPolytope(EurBoundsError):
    """A half-space system has no feasible point."""


class TooManyVertices(EurBoundsError):
    """Vertex enumeration exceeded the configured vertex limit."""


class InvalidDistribution(EurBoundsError, ValueError):
    """A vector is not a probability distribution within tolerance."""


class InvalidEntropySpec(EurBoundsError, ValueError):
    """Entropy family and order are inconsistent."""


class NotOrthonormal(EurBoundsError, ValueError):
    """A list of vectors is not an orthonormal basis."""


class OutOfRange(EurBoundsError, ValueError):
    """A measurement-family parameter lies outside its declared range."""


class DimensionTooLarge(EurBoundsError, ValueError):
    """The brute-force oracle refuses problems above its dimension cap."""


class NotBases(EurBoundsError, ValueError):
    """Analytic bounds need exactly two basis-type measurements."""


class ParseError(EurBoundsError, ValueError):
    """
    A measurement specification file could not be parsed.

    Attributes
    ----------
    field : str or None
        Dotted path of the offending field, e.g. ``measurements[1].vectors``.
    line : int or None
        Line number for JSON syntax errors.
    """

    def __init__(self, message, field=None, line=None):
        location = []
        if line is not None:
            location.append(f"line {line}")
        if field is not None:
            location.append(f"field {field}")
        if location:
            message = f"{message} ({', '.join(location)})"
        super().__init__(message)
        self.field = field
        self.line = line


class DegenerateOverlapWarning(UserWarning):
    """c2 = 0: CP/RPZ fall back to the Maassen-Uffink value."""
