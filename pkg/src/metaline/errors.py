"""Exception hierarchy shared by all metaline modules."""


class MetalineError(Exception):
    """Base class for every error raised by this package."""


class DomainError(MetalineError, ValueError):
    """An argument lies outside the domain where a formula is defined."""


class SingularMediumError(MetalineError, ZeroDivisionError):
    """Zero surface conductivity: the sheet supports no plasmon."""


class NotFoundError(MetalineError):
    """A root search failed because the target is not bracketed.

    ``attainable`` holds the (low, high) range of values reachable within the
    search bounds.
    """

    def __init__(self, message, attainable=None):
        super().__init__(message)
        self.attainable = attainable


class QuadratureError(MetalineError, ArithmeticError):
    """Adaptive quadrature did not reach the requested tolerance."""


class SingularityError(MetalineError, ZeroDivisionError):
    """kL + kR = 0 at a discontinuity."""


class OpaqueInterfaceError(MetalineError):
    """Zero transmission: the interface cannot be cast as a transfer matrix."""


class DegenerateNetworkError(MetalineError):
    """A transfer matrix cannot be converted to scattering parameters."""


class CoverageError(MetalineError):
    """A target transfer value is not reachable by any unit cell."""

    def __init__(self, message, cell_index=None, residual=None):
        super().__init__(message)
        self.cell_index = cell_index
        self.residual = residual


class GeometryError(MetalineError, ValueError):
    """Inconsistent or unphysical geometry (lens index, cell counts, lengths)."""


class ParseError(MetalineError, ValueError):
    """Malformed input file; the message names the offending line."""

    def __init__(self, message, path=None, line=None):
        super().__init__(message)
        self.path = path
        self.line = line
