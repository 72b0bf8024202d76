"""Exception types shared across the package.

The CLI maps these onto exit codes: configuration problems exit 1,
numerical failures exit 2, Monte-Carlo sign collapse exits 3.
"""


class DimerTrapError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(DimerTrapError):
    """Invalid configuration text or parameter values."""


class ExceptionalPointError(DimerTrapError):
    """Gamma = 2V: the bi-orthonormal eigenbasis is undefined."""


class OverdampedError(DimerTrapError):
    """Closed-form survival requested for Gamma >= 2V."""


class IntegrationError(DimerTrapError):
    """ODE propagation produced NaNs or violated the trace bound."""


class QuadratureError(DimerTrapError):
    """Bath quadrature did not reach the requested tolerance."""


class SignCollapseError(DimerTrapError):
    """MC normalization estimate is statistically compatible with zero."""

    def __init__(self, message: str, average_sign: float):
        super().__init__(message)
        self.average_sign = average_sign


class ErgodicityError(DimerTrapError):
    """No Monte-Carlo move was accepted during burn-in."""


class FitError(DimerTrapError):
    """A least-squares or line-search fit failed or is ill-posed."""


class StitchError(DimerTrapError):
    """PIMC and LvNE branches disagree at the crossover point."""
