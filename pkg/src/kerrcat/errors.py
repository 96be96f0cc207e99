"""Exception types shared across the package."""


class KerrcatError(Exception):
    """Base class for all package-specific errors."""


class TruncationError(KerrcatError):
    """Fock-space truncation too small for the requested object."""


class LayoutMismatch(KerrcatError):
    """Operator or state does not fit the given mode layout."""


class DomainError(KerrcatError):
    """Argument outside the mathematical domain of an operation."""


class QuadratureFailure(KerrcatError):
    """Adaptive quadrature failed to reach the requested tolerance."""


class KernelCoverage(KerrcatError):
    """Correlation kernel grid does not cover the requested time span."""


class ConvergenceError(KerrcatError):
    """Iterative refinement stopped before reaching its tolerance."""


class ZeroProbability(KerrcatError):
    """Conditional detection outcome has (numerically) zero probability."""


class DimensionCap(KerrcatError):
    """Joint Hilbert-space dimension exceeds the configured cap."""


class GridAliasing(KerrcatError):
    """Phase-space sampling grid too small for the state's support."""


class ConfigError(KerrcatError):
    """Invalid experiment configuration; message carries the field path."""
