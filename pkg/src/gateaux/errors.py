"""Exception hierarchy shared by every module of the package."""


class GateauxError(Exception):
    """Base class for all errors raised by this package."""


class InvalidInputError(GateauxError, ValueError):
    """Input has the wrong shape, is non-finite, or violates a precondition."""


class DegenerateInputError(GateauxError, ValueError):
    """Input is valid but degenerate for the requested operation (e.g. a zero matrix)."""


class NotFoundError(GateauxError, RuntimeError):
    """A constructive search exhausted its budget without producing a certificate."""


class VerificationError(GateauxError, RuntimeError):
    """A freshly built certificate failed its own re-verification."""


class CertificateRejected(GateauxError):
    """A caller-supplied certificate violates one of its defining constraints.

    ``constraint`` names the violated condition and ``residual`` is the
    measured violation.
    """

    def __init__(self, constraint: str, residual: float):
        super().__init__(f"certificate rejected: {constraint} (residual {residual:.3e})")
        self.constraint = constraint
        self.residual = residual
