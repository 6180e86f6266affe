"""Exception types shared across the package."""


class OrbitWalksError(Exception):
    """Base class for all package errors."""


class PoleAtPoint(OrbitWalksError):
    """A rational function was evaluated where its denominator vanishes."""


class SingularMatrix(OrbitWalksError):
    """A linear system has no unique solution."""


class NoPolynomialFit(OrbitWalksError):
    """No polynomial of the allowed degree passes all data points."""


class NoRationalFit(OrbitWalksError):
    """No rational function of the allowed degrees validates on held-out data.

    Often means the stabilization threshold has not been reached yet;
    dropping the smallest-n points and retrying may help.
    """


class TooSmallN(OrbitWalksError):
    """Graph family instantiated below its minimum admissible size."""


class UnknownFamily(OrbitWalksError):
    """Family name not present in the built-in registry."""


class SpecError(OrbitWalksError):
    """Malformed family specification."""


class DisconnectedFamily(OrbitWalksError):
    """A sampled member of the family is not connected."""


class InvalidHold(OrbitWalksError):
    """Lazy-walk holding probability outside [0, 1)."""


class NotReversible(OrbitWalksError):
    """Operation requires a reversible walk but detailed balance fails."""


class PeriodicChain(OrbitWalksError):
    """Total-variation profiles are not defined for periodic chains."""


class ComplexSpectrum(OrbitWalksError):
    """Eigenvalues have non-real parts beyond tolerance."""


class ToleranceExceeded(OrbitWalksError):
    """A floating-point residual check exceeded its tolerance."""

    def __init__(self, message: str, residual: float = float("nan")):
        super().__init__(message)
        self.residual = residual
