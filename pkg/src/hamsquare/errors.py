"""Define exceptions raised across hamsquare."""


class InvalidVertexError(ValueError):
    """Raise when a vertex id lies outside ``0..n-1``."""


class Graph6FormatError(ValueError):
    """Raise when a graph6 line is malformed."""


class PreconditionError(ValueError):
    """Raise when the arguments of an operation violate its preconditions."""


class SolverCapError(ValueError):
    """Raise when a graph is too large for the exact solver."""


class MalformedRecordError(ValueError):
    """Raise when a certificate file record cannot be parsed."""


class SearchTimeoutError(RuntimeError):
    """Raise when a search exceeds its time budget.

    A timeout says nothing about existence. Callers must report it as unknown.
    """


class TheoremFinding(RuntimeError):
    """Raise when exhaustive search contradicts a published existence theorem.

    :param theorem: short name of the contradicted statement
    :param instance: human readable description of the offending instance
    """

    def __init__(self, theorem: str, instance: str) -> None:
        """Initialize finding."""
        self.theorem = theorem
        self.instance = instance
        super().__init__(f"{theorem} fails on {instance}")


class InvalidCertificateError(RuntimeError):
    """Raise when an assembled certificate fails the checker.

    This points at a construction bug, not at a missing hamiltonian object.
    """
