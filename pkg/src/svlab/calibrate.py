"""Maximum-likelihood fitting of volatility and return distributions.

The pipeline mirrors the empirical workflow: build a daily volatility proxy
from closing prices (absolute detrended log-returns), fit candidate
stationary families to it, fit return distributions, and compare return
densities across horizons.  All fits run through a self-contained
derivative-free Nelder-Mead optimizer.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from datetime import date

import numpy as np

from .analytic import (
    DensityFamily,
    GammaDensity,
    LogNormalDensity,
    NormalDensity,
    StudentTDensity,
)
from .errors import DomainError, InsufficientDataError, InvalidParamsError
from .estimators import EmpiricalDensity, histogram_density

MIN_FIT_SAMPLES = 30
FIT_FAMILY_NAMES = ("normal", "gamma", "lognormal", "student_t")


@dataclass(frozen=True)
class PriceSeries:
    """Daily closing prices with strictly increasing dates."""

    dates: tuple[date, ...]
    closes: np.ndarray
    symbol: str = ""

    def __post_init__(self):
        closes = np.asarray(self.closes, dtype=float)
        object.__setattr__(self, "closes", closes)
        object.__setattr__(self, "dates", tuple(self.dates))
        if len(self.dates) != len(closes):
            raise InvalidParamsError("dates and closes must share length")
        if len(closes) < 2:
            raise InvalidParamsError("price series needs at least 2 closes")
        if not np.all(np.isfinite(closes)) or np.any(closes <= 0):
            raise InvalidParamsError("closes must be positive and finite")
        for a, b in zip(self.dates, self.dates[1:]):
            if not b > a:
                raise InvalidParamsError(f"dates must be strictly increasing at {b}")

    def __len__(self) -> int:
        return len(self.closes)


@dataclass(frozen=True)
class FitResult:
    """Outcome of one maximum-likelihood fit."""

    family: DensityFamily
    loglik: float
    n_samples: int
    converged: bool
    n_evals: int

    @property
    def aic(self) -> float:
        return 2.0 * self.family.param_count - 2.0 * self.loglik

    def to_dict(self) -> dict:
        return {
            "family": self.family.name,
            "parameters": list(self.family.params),
            "loglik": self.loglik,
            "aic": self.aic,
            "n_samples": self.n_samples,
            "converged": self.converged,
            "n_evals": self.n_evals,
        }


def log_returns(prices: PriceSeries) -> np.ndarray:
    """Daily log-returns ln(close_i / close_{i-1})."""
    ratios = prices.closes[1:] / prices.closes[:-1]
    if np.any(ratios <= 0) or not np.all(np.isfinite(ratios)):
        raise InvalidParamsError("non-positive or non-finite price ratio")
    return np.log(ratios)


def detrended_returns(prices: PriceSeries) -> np.ndarray:
    """Zero-mean daily log-returns (sample-mean detrending)."""
    r = log_returns(prices)
    return r - r.mean()


def volatility_proxy(prices: PriceSeries) -> np.ndarray:
    """Absolute detrended daily log-returns, the daily volatility observable.

    The sample mean of the returns absorbs both the drift and the
    half-variance correction at daily resolution.
    """
    proxy = np.abs(detrended_returns(prices))
    if len(proxy) < MIN_FIT_SAMPLES:
        warnings.warn(
            f"only {len(proxy)} proxy values; too few for distribution fits",
            UserWarning,
            stacklevel=2,
        )
    return proxy


def nelder_mead(
    objective,
    start,
    max_evals: int = 20_000,
    tol: float = 1e-8,
    initial_step: float = 0.05,
):
    """Minimize a scalar function with the standard Nelder-Mead simplex.

    Reflection/expansion/contraction/shrink coefficients are (1, 2, 0.5,
    0.5).  Terminates when the relative simplex spread (both in x and in f)
    drops below `tol`, or after max_evals objective evaluations.  Fully
    deterministic for a fixed starting point.

    Returns (argmin, value, diagnostics) where diagnostics carries n_evals,
    n_iterations and a converged flag.
    """
    x0 = np.asarray(start, dtype=float).ravel()
    n = x0.size
    if n == 0:
        raise InvalidParamsError("start point must be non-empty")

    evals = 0

    def f(x):
        nonlocal evals
        evals += 1
        return float(objective(x))

    f0 = f(x0)
    if not math.isfinite(f0):
        raise InvalidParamsError("objective is not finite at the start point")

    simplex = [x0]
    for i in range(n):
        step = initial_step * abs(x0[i]) if x0[i] != 0 else 0.00025
        v = x0.copy()
        v[i] += step
        simplex.append(v)
    simplex = np.array(simplex)
    fvals = np.array([f0] + [f(v) for v in simplex[1:]])
    fvals = np.where(np.isfinite(fvals), fvals, np.inf)

    iterations = 0
    converged = False
    while evals < max_evals:
        order = np.argsort(fvals, kind="stable")
        simplex, fvals = simplex[order], fvals[order]
        best, worst = fvals[0], fvals[-1]

        x_spread = np.max(np.abs(simplex[1:] - simplex[0])) / (
            1.0 + np.max(np.abs(simplex[0]))
        )
        f_spread = abs(worst - best) / (1.0 + abs(best))
        if x_spread < tol and f_spread < tol:
            converged = True
            break

        centroid = simplex[:-1].mean(axis=0)
        reflected = centroid + 1.0 * (centroid - simplex[-1])
        f_r = f(reflected)
        if not math.isfinite(f_r):
            f_r = math.inf

        if f_r < fvals[0]:
            expanded = centroid + 2.0 * (centroid - simplex[-1])
            f_e = f(expanded)
            if math.isfinite(f_e) and f_e < f_r:
                simplex[-1], fvals[-1] = expanded, f_e
            else:
                simplex[-1], fvals[-1] = reflected, f_r
        elif f_r < fvals[-2]:
            simplex[-1], fvals[-1] = reflected, f_r
        else:
            if f_r < fvals[-1]:
                contracted = centroid + 0.5 * (reflected - centroid)
            else:
                contracted = centroid + 0.5 * (simplex[-1] - centroid)
            f_c = f(contracted)
            if math.isfinite(f_c) and f_c < min(f_r, fvals[-1]):
                simplex[-1], fvals[-1] = contracted, f_c
            else:
                # shrink toward the best vertex
                for i in range(1, n + 1):
                    simplex[i] = simplex[0] + 0.5 * (simplex[i] - simplex[0])
                    fv = f(simplex[i])
                    fvals[i] = fv if math.isfinite(fv) else math.inf
        iterations += 1

    order = np.argsort(fvals, kind="stable")
    simplex, fvals = simplex[order], fvals[order]
    diagnostics = {
        "n_evals": evals,
        "n_iterations": iterations,
        "converged": converged,
    }
    return simplex[0], float(fvals[0]), diagnostics


def _require_positive(samples: np.ndarray, family: str) -> None:
    if np.any(samples <= 0):
        raise DomainError(f"{family} requires strictly positive samples")


def _fit_normal(samples: np.ndarray) -> FitResult:
    mean = float(samples.mean())
    std = float(samples.std())  # MLE (biased) standard deviation
    if std <= 0:
        raise DomainError("normal fit needs non-degenerate samples")
    family = NormalDensity(mean, std)
    loglik = float(np.sum(family.log_pdf(samples)))
    return FitResult(family, loglik, len(samples), converged=True, n_evals=0)


def _optimize_family(samples, build, start) -> FitResult:
    def negloglik(p):
        try:
            fam = build(p)
        except (InvalidParamsError, OverflowError):
            return math.inf
        ll = np.sum(fam.log_pdf(samples))
        return -float(ll) if np.isfinite(ll) else math.inf

    x, fval, diag = nelder_mead(negloglik, start)
    return FitResult(
        family=build(x),
        loglik=-fval,
        n_samples=len(samples),
        converged=diag["converged"],
        n_evals=diag["n_evals"],
    )


def fit_mle(family_kind: str, samples: np.ndarray) -> FitResult:
    """Maximum-likelihood fit of one family from moment-matched starts.

    The normal family uses its closed-form MLE; the others run Nelder-Mead
    on unconstrained transforms of the parameters.  Gamma and lognormal
    require strictly positive samples.
    """
    x = np.asarray(samples, dtype=float)
    if len(x) < MIN_FIT_SAMPLES:
        raise InsufficientDataError(
            f"{len(x)} samples; need at least {MIN_FIT_SAMPLES} to fit"
        )
    if not np.all(np.isfinite(x)):
        raise InvalidParamsError("samples contain non-finite entries")

    if family_kind == "normal":
        return _fit_normal(x)

    if family_kind == "gamma":
        _require_positive(x, "gamma")
        mean, var = float(x.mean()), float(x.var())
        if var <= 0:
            raise DomainError("gamma fit needs non-degenerate samples")
        shape0 = max(mean * mean / var, 1e-8)
        scale0 = max(var / mean, 1e-300)
        return _optimize_family(
            x,
            lambda p: GammaDensity(math.exp(p[0]), math.exp(p[1])),
            [math.log(shape0), math.log(scale0)],
        )

    if family_kind == "lognormal":
        _require_positive(x, "lognormal")
        lx = np.log(x)
        mu0, sd0 = float(lx.mean()), float(lx.std())
        if sd0 <= 0:
            raise DomainError("lognormal fit needs non-degenerate samples")
        return _optimize_family(
            x,
            lambda p: LogNormalDensity(p[0], math.exp(p[1])),
            [mu0, math.log(sd0)],
        )

    if family_kind == "student_t":
        mean, std = float(np.median(x)), float(x.std())
        if std <= 0:
            raise DomainError("student_t fit needs non-degenerate samples")
        c = x - x.mean()
        m2 = float(np.mean(c**2))
        excess = float(np.mean(c**4) / (m2 * m2) - 3.0) if m2 > 0 else 0.0
        dof0 = 4.0 + 6.0 / excess if excess > 0.1 else 30.0
        dof0 = float(np.clip(dof0, 2.5, 50.0))
        scale0 = std * math.sqrt((dof0 - 2.0) / dof0)
        # dof parameterized as 0.5 + exp(u), unconstrained above 0.5
        return _optimize_family(
            x,
            lambda p: StudentTDensity(p[0], math.exp(p[1]), 0.5 + math.exp(p[2])),
            [mean, math.log(scale0), math.log(dof0 - 0.5)],
        )

    raise InvalidParamsError(
        f"unknown family {family_kind!r}; expected one of {FIT_FAMILY_NAMES}"
    )


def fit_volatility_all(prices: PriceSeries) -> list[FitResult]:
    """Fit normal, gamma and lognormal to the volatility proxy.

    Returns results sorted by log-likelihood, best first.  Families whose
    fit fails (support violation, degeneracy) are skipped with a warning.
    """
    proxy = volatility_proxy(prices)
    results: list[FitResult] = []
    for family in ("normal", "gamma", "lognormal"):
        try:
            results.append(fit_mle(family, proxy))
        except (DomainError, InsufficientDataError) as exc:
            warnings.warn(f"{family} fit skipped: {exc}", UserWarning, stacklevel=2)
    results.sort(key=lambda r: r.loglik, reverse=True)
    return results


def fit_returns(
    prices: PriceSeries, families: tuple[str, ...] = ("normal", "student_t")
) -> list[FitResult]:
    """Fit return-distribution families to zero-mean daily log-returns."""
    for f in families:
        if f not in ("normal", "student_t"):
            raise InvalidParamsError(f"unsupported return family {f!r}")
    r = detrended_returns(prices)
    results = [fit_mle(f, r) for f in families]
    results.sort(key=lambda res: res.loglik, reverse=True)
    return results


def multi_horizon_densities(
    prices: PriceSeries, horizons: list[int]
) -> list[EmpiricalDensity]:
    """Empirical densities of h-day zero-mean log-returns for each horizon.

    Uses non-overlapping windows when at least 100 fit in the series;
    otherwise overlapping windows with an effective-sample-size note in the
    n_effective field.
    """
    if not horizons:
        raise InvalidParamsError("horizons must be non-empty")
    if any(h < 1 for h in horizons):
        raise InvalidParamsError("horizons must be >= 1 day")
    r = detrended_returns(prices)
    n = len(r)
    out: list[EmpiricalDensity] = []
    for h in horizons:
        if h == 1:
            samples, n_eff = r, float(n)
        elif n // h >= 100:
            m = (n // h) * h
            samples = r[:m].reshape(-1, h).sum(axis=1)
            n_eff = float(len(samples))
        else:
            if n < h + 1:
                raise InsufficientDataError(
                    f"series of {n} returns cannot form a {h}-day horizon"
                )
            warnings.warn(
                f"fewer than 100 non-overlapping {h}-day windows; "
                "using overlapping windows",
                UserWarning,
                stacklevel=2,
            )
            csum = np.concatenate(([0.0], np.cumsum(r)))
            samples = csum[h:] - csum[:-h]
            n_eff = len(samples) / h
        out.append(histogram_density(samples, n_effective=n_eff))
    return out
