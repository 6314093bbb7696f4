"""Exception hierarchy shared by all modules."""


class FreeConvError(Exception):
    """Base class for library errors."""


class DomainError(FreeConvError, ValueError):
    """Argument outside the domain of an operation."""


class SingularityError(FreeConvError):
    """Transform evaluated on the support of a measure."""


class PoleError(FreeConvError):
    """Zero of z*m(z) + 1 hit while forming the M-transform."""

    def __init__(self, message, location=None):
        super().__init__(message)
        self.location = location


class ConvergenceError(FreeConvError):
    """Subordination iteration failed to converge."""

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace or []


class BoundaryError(FreeConvError):
    """Boundary extrapolation to the real axis failed."""

    def __init__(self, message, state=None):
        super().__init__(message)
        self.state = state


class StructureError(FreeConvError):
    """Input does not have the structure the edge machinery needs."""


class DegenerateEdgeError(FreeConvError):
    """Second derivative of the inverse subordination map vanishes at an edge."""
