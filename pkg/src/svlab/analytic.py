"""Closed-form targets: stationary laws, correlation curves, transient moments.

These are the reference quantities the simulation output is checked against,
and the distribution families the calibration module fits by maximum
likelihood.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, special, stats

from .errors import (
    InvalidParamsError,
    UnsupportedModelError,
    UnsupportedMomentError,
)
from .models import ModelKind, ModelParams

_LOG_2PI = math.log(2.0 * math.pi)


@dataclass(frozen=True)
class NormalDensity:
    """Gaussian law with mean and standard deviation."""

    mean_: float
    std: float
    name = "normal"
    param_count = 2

    def __post_init__(self):
        if not (self.std > 0):
            raise InvalidParamsError(f"std must be > 0, got {self.std}")

    @property
    def params(self) -> tuple[float, ...]:
        return (self.mean_, self.std)

    def log_pdf(self, x):
        z = (np.asarray(x, dtype=float) - self.mean_) / self.std
        return -0.5 * _LOG_2PI - math.log(self.std) - 0.5 * z * z

    def pdf(self, x):
        return np.exp(self.log_pdf(x))

    def cdf(self, x):
        return special.ndtr((np.asarray(x, dtype=float) - self.mean_) / self.std)

    def mean(self) -> float:
        return self.mean_

    def variance(self) -> float:
        return self.std**2

    def support(self) -> tuple[float, float]:
        return (-np.inf, np.inf)

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        return rng.normal(self.mean_, self.std, size=n)


@dataclass(frozen=True)
class GammaDensity:
    """Gamma law with shape and scale."""

    shape: float
    scale: float
    name = "gamma"
    param_count = 2

    def __post_init__(self):
        if not (self.shape > 0):
            raise InvalidParamsError(f"shape must be > 0, got {self.shape}")
        if not (self.scale > 0):
            raise InvalidParamsError(f"scale must be > 0, got {self.scale}")

    @property
    def params(self) -> tuple[float, ...]:
        return (self.shape, self.scale)

    def log_pdf(self, x):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = (
                (self.shape - 1.0) * np.log(x)
                - x / self.scale
                - special.gammaln(self.shape)
                - self.shape * math.log(self.scale)
            )
        return np.where(x > 0, out, -np.inf)

    def pdf(self, x):
        return np.exp(self.log_pdf(x))

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(x > 0, special.gammainc(self.shape, np.maximum(x, 0) / self.scale), 0.0)

    def mean(self) -> float:
        return self.shape * self.scale

    def variance(self) -> float:
        return self.shape * self.scale**2

    def support(self) -> tuple[float, float]:
        return (0.0, np.inf)

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        return rng.gamma(self.shape, self.scale, size=n)


@dataclass(frozen=True)
class LogNormalDensity:
    """Log-normal law parameterized by the mean and std of ln(x)."""

    log_mean: float
    log_std: float
    name = "lognormal"
    param_count = 2

    def __post_init__(self):
        if not (self.log_std > 0):
            raise InvalidParamsError(f"log_std must be > 0, got {self.log_std}")

    @property
    def params(self) -> tuple[float, ...]:
        return (self.log_mean, self.log_std)

    def log_pdf(self, x):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            z = (np.log(x) - self.log_mean) / self.log_std
            out = -np.log(x) - math.log(self.log_std) - 0.5 * _LOG_2PI - 0.5 * z * z
        return np.where(x > 0, out, -np.inf)

    def pdf(self, x):
        return np.exp(self.log_pdf(x))

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            z = (np.log(np.maximum(x, 1e-300)) - self.log_mean) / self.log_std
        return np.where(x > 0, special.ndtr(z), 0.0)

    def mean(self) -> float:
        return math.exp(self.log_mean + 0.5 * self.log_std**2)

    def variance(self) -> float:
        s2 = self.log_std**2
        return (math.exp(s2) - 1.0) * math.exp(2.0 * self.log_mean + s2)

    def support(self) -> tuple[float, float]:
        return (0.0, np.inf)

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        return rng.lognormal(self.log_mean, self.log_std, size=n)


@dataclass(frozen=True)
class StudentTDensity:
    """Location-scale Student-t law with dof degrees of freedom."""

    location: float
    scale: float
    dof: float
    name = "student_t"
    param_count = 3

    def __post_init__(self):
        if not (self.scale > 0):
            raise InvalidParamsError(f"scale must be > 0, got {self.scale}")
        if not (self.dof > 0):
            raise InvalidParamsError(f"dof must be > 0, got {self.dof}")

    @property
    def params(self) -> tuple[float, ...]:
        return (self.location, self.scale, self.dof)

    def log_pdf(self, x):
        nu = self.dof
        z = (np.asarray(x, dtype=float) - self.location) / self.scale
        return (
            special.gammaln(0.5 * (nu + 1.0))
            - special.gammaln(0.5 * nu)
            - 0.5 * math.log(nu * math.pi)
            - math.log(self.scale)
            - 0.5 * (nu + 1.0) * np.log1p(z * z / nu)
        )

    def pdf(self, x):
        return np.exp(self.log_pdf(x))

    def cdf(self, x):
        z = (np.asarray(x, dtype=float) - self.location) / self.scale
        return stats.t.cdf(z, self.dof)

    def mean(self) -> float:
        if self.dof <= 1:
            raise UnsupportedMomentError("student-t mean requires dof > 1")
        return self.location

    def variance(self) -> float:
        if self.dof <= 2:
            raise UnsupportedMomentError("student-t variance requires dof > 2")
        return self.scale**2 * self.dof / (self.dof - 2.0)

    def support(self) -> tuple[float, float]:
        return (-np.inf, np.inf)

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        return self.location + self.scale * rng.standard_t(self.dof, size=n)


DensityFamily = NormalDensity | GammaDensity | LogNormalDensity | StudentTDensity


def normalization_error(family: DensityFamily) -> float:
    """|1 - integral of pdf| by adaptive quadrature over the support."""
    lo, hi = family.support()
    total, _ = integrate.quad(lambda v: float(family.pdf(v)), lo, hi, limit=200)
    return abs(1.0 - total)


def beta_coefficient(params: ModelParams) -> float:
    """Stationary-variance scale of the driving process: beta = k^2 / (2 alpha)."""
    beta = params.k**2 / (2.0 * params.alpha)
    if not (beta > 0):
        raise InvalidParamsError(f"beta must be > 0, got {beta}")
    return beta


def stationary_volatility_pdf(params: ModelParams) -> DensityFamily:
    """Stationary law of the volatility quantity each model is tested on.

    vasicek: law of sigma = Y      -> Normal(m, sqrt(k^2/2alpha))
    heston:  law of Y = sigma^2    -> Gamma(2 alpha m / k^2, k^2/(2 alpha))
    expou:   law of sigma = exp(Y) -> LogNormal(0, sqrt(beta))

    Each parameterization is the stationary solution of the corresponding
    driving SDE and is verified against long-run simulated moments in the
    test suite before being relied on.
    """
    beta = beta_coefficient(params)
    if params.kind is ModelKind.VASICEK:
        return NormalDensity(params.m, math.sqrt(beta))
    if params.kind is ModelKind.HESTON:
        return GammaDensity(shape=2.0 * params.alpha * params.m / params.k**2, scale=beta)
    return LogNormalDensity(0.0, math.sqrt(beta))


def stationary_y_pdf(params: ModelParams) -> DensityFamily:
    """Stationary law of the driving process Y itself."""
    beta = beta_coefficient(params)
    if params.kind is ModelKind.EXP_OU:
        return NormalDensity(0.0, math.sqrt(beta))
    return stationary_volatility_pdf(params)


def leverage_analytic(params: ModelParams, tau):
    """Return-volatility correlation target at lag tau (days).

    vasicek: rho * exp(-alpha tau) * H(tau)
    expou:   rho * exp(-k^2 tau) * H(tau)   (valid for k^2 >> alpha; see
             leverage_exact for the finite-reversion curve)

    H is the right-continuous Heaviside step: the curve is 0 for tau < 0 and
    equals rho at tau = 0.  No closed form exists for heston.
    """
    if params.kind is ModelKind.HESTON:
        raise UnsupportedModelError("no analytic leverage target for the heston model")
    tau_arr = np.asarray(tau, dtype=float)
    rate = params.alpha if params.kind is ModelKind.VASICEK else params.k**2
    out = params.rho * np.exp(-rate * np.maximum(tau_arr, 0.0))
    out = np.where(tau_arr >= 0, out, 0.0)
    return out if np.ndim(tau) else float(out)


def leverage_exact(params: ModelParams, tau):
    """Model-implied leverage curve including finite mean-reversion effects.

    This is the exact expectation of the normalized return-based estimator
    in the stationary regime:

    vasicek: rho e^{-a tau} (m^2 + beta e^{-a tau}) / (m^2 + beta)
    expou:   rho e^{-a tau} exp(-2 beta (1 - e^{-a tau}))

    For the expou model the short-lag expansion of the exponent is
    -(alpha + k^2) tau, which reduces to the -k^2 tau of leverage_analytic
    when k^2 dominates alpha.
    """
    if params.kind is ModelKind.HESTON:
        raise UnsupportedModelError("no closed-form leverage curve for the heston model")
    tau_arr = np.asarray(tau, dtype=float)
    beta = beta_coefficient(params)
    u = np.exp(-params.alpha * np.maximum(tau_arr, 0.0))
    if params.kind is ModelKind.VASICEK:
        m2 = params.m**2
        out = params.rho * u * (m2 + beta * u) / (m2 + beta)
    else:
        out = params.rho * u * np.exp(-2.0 * beta * (1.0 - u))
    out = np.where(tau_arr >= 0, out, 0.0)
    return out if np.ndim(tau) else float(out)


def autocorr_analytic(params: ModelParams, tau):
    """Volatility autocorrelation target at lag tau >= 0 (days).

    expou: (exp(4 beta e^{-alpha tau}) - 1) / (3 exp(4 beta) - 1), the exact
    squared-increment correlation coefficient (its tau -> 0 value is below 1
    by construction).

    vasicek/heston: only the single-exponential shape is predicted, so the
    unit-normalized exp(-alpha tau) is returned; comparisons against the
    estimator are made after rescaling both curves by their first-lag value.
    """
    tau_arr = np.asarray(tau, dtype=float)
    if np.any(tau_arr < 0):
        raise InvalidParamsError("autocorrelation lag must be >= 0")
    if params.kind is ModelKind.EXP_OU:
        beta = beta_coefficient(params)
        out = np.expm1(4.0 * beta * np.exp(-params.alpha * tau_arr)) / (
            3.0 * math.exp(4.0 * beta) - 1.0
        )
    else:
        out = np.exp(-params.alpha * tau_arr)
    return out if np.ndim(tau) else float(out)


def transient_mean(params: ModelParams, t: float) -> float:
    """E[Y(t)]: exponential relaxation to the reversion level (all models)."""
    if t < 0:
        raise InvalidParamsError(f"t must be >= 0, got {t}")
    m_eff = params.reversion_level
    return m_eff + (params.y0 - m_eff) * math.exp(-params.alpha * t)


def transient_moments(params: ModelParams, t: float) -> tuple[float, float]:
    """(mean, variance) of Y(t) for the linear-SDE models.

    vasicek/expou: mean m_eff + (y0 - m_eff) e^{-alpha t},
    variance (k^2/2alpha)(1 - e^{-2 alpha t}).  The heston variance has no
    implemented closed form and raises UnsupportedMomentError.
    """
    if params.kind is ModelKind.HESTON:
        raise UnsupportedMomentError(
            "heston transient variance is simulation-only; use transient_mean"
        )
    mean = transient_mean(params, t)
    beta = beta_coefficient(params)
    variance = beta * (1.0 - math.exp(-2.0 * params.alpha * t))
    return mean, variance
