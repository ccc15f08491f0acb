"""Exception and warning classes raised across the package."""


class HybridQEDError(Exception):
    """Base class for all package errors."""


class NonHermitianInput(HybridQEDError, ValueError):
    pass


class ConvergenceFailure(HybridQEDError, RuntimeError):
    pass


class SingularMatrix(HybridQEDError, ArithmeticError):
    pass


class DegenerateKernel(HybridQEDError, ArithmeticError):
    """The null space is not one-dimensional (ambiguous steady state)."""


class StepFailure(HybridQEDError, RuntimeError):
    pass


class DimensionOverflow(HybridQEDError, ValueError):
    pass


class InvalidParams(HybridQEDError, ValueError):
    pass


class ZeroIntensity(HybridQEDError, ArithmeticError):
    """Intensity below the floor; g2 is undefined."""


class ConfigError(HybridQEDError, ValueError):
    """Invalid experiment configuration.

    ``field`` is the dotted config path and ``line`` the source line, when known.
    """

    def __init__(self, message, field=None, line=None):
        self.field = field
        self.line = line
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field '{field}'")
        prefix = f"[{', '.join(where)}] " if where else ""
        super().__init__(prefix + message)


class ParityWarning(UserWarning):
    """The analytic weak-drive scheme is used outside the parity-conserving case."""


class SecularityWarning(UserWarning):
    """Two distinct transitions share a frequency."""
