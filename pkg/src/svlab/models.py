"""Model definitions for the three correlated stochastic volatility models.

Each model couples a zero-mean log-return X to a driving process Y:

    dX(t) = f(Y(t)) dW1(t),                X(0) = 0
    dY(t) = drift(Y(t)) dt + g(Y(t)) dW2(t), Y(0) = y0

with dW2 = rho dW1 + sqrt(1 - rho^2) dZ.  The three members differ in the
volatility map f and the Y dynamics:

    vasicek   f(Y) = Y        dY = alpha (m - Y) dt + k dW2
    heston    f(Y) = sqrt(Y)  dY = alpha (m - Y) dt + k sqrt(Y) dW2   (CIR)
    expou     f(Y) = exp(Y)   dY = -alpha Y dt + k dW2

Conventions
-----------
- Rates (alpha, mu) are per day; k is per sqrt(day); 252 trading days/year.
- The exp-OU drift is implemented as -alpha*Y (reversion to zero).  Its
  reversion level m is stored but forced to 0 so a single parameter record
  serves all three models.
- Heston negative-Y handling is full truncation: the diffusion and the
  volatility map evaluate sqrt(max(Y, 0)); the linear drift uses raw Y.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable

import numpy as np

from .errors import InvalidParamsError


class ModelKind(str, Enum):
    """The three supported volatility models."""

    VASICEK = "vasicek"
    HESTON = "heston"
    EXP_OU = "expou"


@dataclass(frozen=True)
class ModelParams:
    """One model's coefficient set.

    Parameters
    ----------
    kind : ModelKind
        Which volatility model the coefficients belong to.
    alpha : float
        Mean-reversion rate of Y (1/day); relaxation time is 1/alpha.
    m : float
        Reversion level (volatility units for vasicek, variance units for
        heston).  Forced to 0 for expou.
    k : float
        Vol-of-vol: diffusion amplitude of Y (per sqrt(day)).
    rho : float
        Correlation between the return and volatility Wiener processes.
    mu : float
        Price drift (1/day).  Only enters the price map, not X or Y.
    y0 : float
        Initial value of the driving process.
    s0 : float
        Initial price.
    """

    kind: ModelKind
    alpha: float
    m: float
    k: float
    rho: float
    mu: float = 0.0
    y0: float = 0.0
    s0: float = 100.0

    def __post_init__(self):
        kind = ModelKind(self.kind)
        object.__setattr__(self, "kind", kind)
        if not (self.alpha > 0):
            raise InvalidParamsError(f"alpha must be > 0, got {self.alpha}")
        if not (self.k > 0):
            raise InvalidParamsError(f"k must be > 0, got {self.k}")
        if not (-1.0 <= self.rho <= 1.0):
            raise InvalidParamsError(f"rho must lie in [-1, 1], got {self.rho}")
        if not (self.s0 > 0):
            raise InvalidParamsError(f"s0 must be > 0, got {self.s0}")
        if kind is ModelKind.HESTON:
            if not (self.m > 0):
                raise InvalidParamsError(f"heston requires m > 0, got {self.m}")
            if self.y0 < 0:
                raise InvalidParamsError(f"heston requires y0 >= 0, got {self.y0}")
        if kind is ModelKind.EXP_OU:
            # reversion level of the exp-OU driving process is zero
            object.__setattr__(self, "m", 0.0)
        for name in ("alpha", "m", "k", "rho", "mu", "y0", "s0"):
            if not math.isfinite(getattr(self, name)):
                raise InvalidParamsError(f"{name} must be finite")

    @property
    def feller_satisfied(self) -> bool:
        """Whether 2*alpha*m >= k^2 (heston positivity indicator)."""
        return 2.0 * self.alpha * self.m >= self.k**2

    @property
    def reversion_level(self) -> float:
        """Drift zero of Y: m for vasicek/heston, 0 for expou."""
        return 0.0 if self.kind is ModelKind.EXP_OU else self.m


@dataclass(frozen=True)
class SdeCoefficients:
    """Callable coefficient triple (drift, diffusion, volatility map) of one model.

    All three callables accept scalars or numpy arrays.  For heston they
    apply full truncation: ``diff_y`` and ``vol_map`` see max(Y, 0) while
    ``drift_y`` uses the raw value.
    """

    drift_y: Callable[[np.ndarray], np.ndarray]
    diff_y: Callable[[np.ndarray], np.ndarray]
    vol_map: Callable[[np.ndarray], np.ndarray]
    params: ModelParams = field(repr=False)


def coefficients(params: ModelParams) -> SdeCoefficients:
    """Build the SDE coefficient functions for one parameter set."""
    alpha, m, k = params.alpha, params.m, params.k
    if params.kind is ModelKind.VASICEK:
        return SdeCoefficients(
            drift_y=lambda y: alpha * (m - y),
            diff_y=lambda y: np.full_like(np.asarray(y, dtype=float), k),
            vol_map=lambda y: np.asarray(y, dtype=float),
            params=params,
        )
    if params.kind is ModelKind.HESTON:
        return SdeCoefficients(
            drift_y=lambda y: alpha * (m - y),
            diff_y=lambda y: k * np.sqrt(np.maximum(y, 0.0)),
            vol_map=lambda y: np.sqrt(np.maximum(y, 0.0)),
            params=params,
        )
    return SdeCoefficients(
        drift_y=lambda y: -alpha * np.asarray(y, dtype=float),
        diff_y=lambda y: np.full_like(np.asarray(y, dtype=float), k),
        vol_map=lambda y: np.exp(y),
        params=params,
    )


def validate(params: ModelParams) -> list[str]:
    """Return non-fatal warnings for an admissible parameter set.

    Hard violations raise :class:`InvalidParamsError` from the ModelParams
    constructor; this function only reports soft issues.
    """
    warnings: list[str] = []
    if params.kind is ModelKind.HESTON and not params.feller_satisfied:
        warnings.append(
            "Feller violated: 2*alpha*m = "
            f"{2 * params.alpha * params.m:.6g} < k^2 = {params.k ** 2:.6g}; "
            "the variance process can hit zero (truncation scheme applies)"
        )
    if abs(params.rho) == 1.0:
        warnings.append("rho at boundary +/-1: volatility and return noise are degenerate")
    return warnings


def log_return_to_price(
    x: float, t: float, params: ModelParams, integrated_var: float
) -> float:
    """Invert the zero-mean log-return map back to a price.

    S = s0 * exp(mu*t - integrated_var/2 + x), where integrated_var is the
    accumulated sigma^2 dt along the path up to t.
    """
    if integrated_var < 0:
        raise InvalidParamsError(f"integrated_var must be >= 0, got {integrated_var}")
    if t < 0:
        raise InvalidParamsError(f"t must be >= 0, got {t}")
    return params.s0 * math.exp(params.mu * t - 0.5 * integrated_var + x)


def price_to_log_return(
    price: float, t: float, params: ModelParams, integrated_var: float
) -> float:
    """Forward map: X = ln(S/s0) - mu*t + integrated_var/2."""
    return math.log(price / params.s0) - params.mu * t + 0.5 * integrated_var
