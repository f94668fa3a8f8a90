"""Exception types shared across the package."""

from __future__ import annotations


class SvlabError(Exception):
    """Base class for all package-specific errors."""


class InvalidParamsError(SvlabError, ValueError):
    """A hard parameter constraint was violated; the message names it."""


class NonFiniteStateError(SvlabError, ArithmeticError):
    """A simulated state became NaN or infinite (time step too large).

    Carries the offending path index and step so blow-ups can be located.
    """

    def __init__(self, path_index: int, step: int, message: str | None = None):
        self.path_index = int(path_index)
        self.step = int(step)
        super().__init__(
            message
            or f"non-finite state at path {self.path_index}, step {self.step}"
        )


class InsufficientDataError(SvlabError, ValueError):
    """Too few observations for the requested statistic."""


class DomainError(SvlabError, ValueError):
    """Samples violate the support of the requested distribution family."""


class GridTooCoarseError(SvlabError, ValueError):
    """Characteristic-function grid does not extend far enough for inversion."""


class UnsupportedModelError(SvlabError, ValueError):
    """The requested quantity has no closed form for this model."""


class UnsupportedMomentError(SvlabError, ValueError):
    """The requested moment is only available by simulation for this model."""


class ConfigError(SvlabError, ValueError):
    """Run configuration failed to parse; message carries line/field info."""


class PriceCsvError(SvlabError, ValueError):
    """Malformed price CSV; message carries the offending row number."""
