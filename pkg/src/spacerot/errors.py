"""Exception hierarchy shared by every module of the package."""


class SpaceRotError(Exception):
    """Base class for all package errors."""


class InvalidAxisError(SpaceRotError, ValueError):
    pass


class InvalidExpressionError(SpaceRotError, ValueError):
    pass


class NotMSRError(SpaceRotError, ValueError):
    """Raised when a pure-product path receives an expression with a Sum node."""


class AveragingError(SpaceRotError, RuntimeError):
    """Quadrature for a time average did not converge.

    ``diagnostics`` carries the sequence of estimates and their changes.
    """

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class NotOmegaInvariantError(SpaceRotError, ValueError):
    pass


class NoSurfaceError(SpaceRotError, ValueError):
    pass


class RootNotFoundError(SpaceRotError, RuntimeError):
    """No sign change was found; ``profile`` holds the sampled (r, value) pairs."""

    def __init__(self, message, profile=None):
        super().__init__(message)
        self.profile = profile if profile is not None else []


class MeshError(SpaceRotError, ValueError):
    pass


class SuperluminalBoostError(SpaceRotError, ValueError):
    pass


class DivisionSingularityError(SpaceRotError, ZeroDivisionError):
    def __init__(self, message, nodes=None):
        super().__init__(message)
        self.nodes = nodes if nodes is not None else []


class DomainError(SpaceRotError, ValueError):
    pass


class BracketError(SpaceRotError, RuntimeError):
    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace if trace is not None else []


class ExprSyntaxError(SpaceRotError, ValueError):
    """Parse failure in the rotation-expression language.

    Attributes:
        offset: byte offset into the source where parsing stopped.
        expected: set of token descriptions that would have been accepted.
    """

    def __init__(self, message, offset, expected=()):
        self.offset = offset
        self.expected = frozenset(expected)
        exp = ", ".join(sorted(self.expected))
        super().__init__(f"{message} at offset {offset}" + (f" (expected {exp})" if exp else ""))
