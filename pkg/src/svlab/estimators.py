"""Statistical estimators over simulated or empirical return series.

Covers the return-based leverage and volatility-autocorrelation estimators,
the empirical characteristic function with FFT inversion, Monte Carlo return
densities, and basic sample moments.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import (
    GridTooCoarseError,
    InsufficientDataError,
    InvalidParamsError,
)
from .models import ModelKind, ModelParams
from .simulate import PathConfig, PathSet, simulate_paths

# E|z|^p for z ~ N(0,1), p = 1, 2, 3
_ABS_NORMAL_MOMENT = {1: math.sqrt(2.0 / math.pi), 2: 1.0, 3: 2.0 * math.sqrt(2.0 / math.pi)}

# per model: (p, s_f) such that the lag-0+ numerator scale
# 2 k E[sigma_t sigma_t f'(Y_t) g(Y_t)/k] equals 2 k s_f E[sigma^p];
# the CIR diffusion's sqrt(Y) factor is what puts heston at p = 2
_LEVERAGE_MOMENT = {
    ModelKind.VASICEK: (2, 1.0),
    ModelKind.EXP_OU: (3, 1.0),
    ModelKind.HESTON: (2, 0.5),
}

DEFAULT_BOOTSTRAP_RESAMPLES = 200


@dataclass(frozen=True)
class ReturnSeries:
    """Ordered per-step return increments dx with their step duration dt (days)."""

    dx: np.ndarray
    dt: float
    origin: str = "simulated"

    def __post_init__(self):
        dx = np.asarray(self.dx, dtype=float)
        object.__setattr__(self, "dx", dx)
        if dx.ndim != 1 or len(dx) < 2:
            raise InsufficientDataError("return series needs at least 2 increments")
        if not np.all(np.isfinite(dx)):
            raise InvalidParamsError("return series contains non-finite entries")
        if not (self.dt > 0):
            raise InvalidParamsError(f"dt must be > 0, got {self.dt}")

    def __len__(self) -> int:
        return len(self.dx)

    @classmethod
    def from_path_set(cls, paths: PathSet, path: int = 0) -> "ReturnSeries":
        if paths.config.record_stride != 1:
            raise InvalidParamsError(
                "return series extraction requires record_stride == 1"
            )
        return cls(dx=np.diff(paths.x[path]), dt=paths.config.dt, origin="simulated")

    def reversed(self) -> "ReturnSeries":
        return ReturnSeries(dx=self.dx[::-1].copy(), dt=self.dt, origin=self.origin)


@dataclass(frozen=True)
class CorrelationCurve:
    """Lag-indexed estimates with per-lag bootstrap standard errors."""

    lags: np.ndarray
    values: np.ndarray
    stderr: np.ndarray

    def __post_init__(self):
        lags = np.asarray(self.lags, dtype=float)
        values = np.asarray(self.values, dtype=float)
        stderr = np.asarray(self.stderr, dtype=float)
        if not (len(lags) == len(values) == len(stderr)):
            raise InvalidParamsError("lags, values and stderr must share length")
        if np.any(np.diff(lags) <= 0):
            raise InvalidParamsError("lags must be strictly increasing")
        if np.any(stderr < 0):
            raise InvalidParamsError("stderr must be non-negative")
        object.__setattr__(self, "lags", lags)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "stderr", stderr)


@dataclass(frozen=True)
class EmpiricalDensity:
    """Grid-valued density estimate normalized to unit mass."""

    grid: np.ndarray
    density: np.ndarray
    n_samples: int
    binwidth: float
    n_effective: float | None = None
    clip_mass: float = 0.0

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        density = np.asarray(self.density, dtype=float)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "density", density)
        if len(grid) != len(density) or len(grid) < 2:
            raise InvalidParamsError("grid and density must share length >= 2")
        if np.any(density < 0):
            raise InvalidParamsError("density must be non-negative")
        total = np.trapezoid(density, grid)
        if abs(total - 1.0) > 1e-3:
            raise InvalidParamsError(
                f"density integrates to {total:.6f}, outside 1 +/- 1e-3"
            )

    def moment(self, order: int) -> float:
        return float(np.trapezoid(self.grid**order * self.density, self.grid))

    def variance(self) -> float:
        m1 = self.moment(1)
        return self.moment(2) - m1 * m1

    def excess_kurtosis(self) -> float:
        m1 = self.moment(1)
        c = self.grid - m1
        m2 = float(np.trapezoid(c**2 * self.density, self.grid))
        m4 = float(np.trapezoid(c**4 * self.density, self.grid))
        return m4 / (m2 * m2) - 3.0


def _check_lag_budget(n: int, max_lag: int) -> None:
    if max_lag < 1:
        raise InvalidParamsError(f"max_lag must be >= 1, got {max_lag}")
    if n < 2 * max_lag:
        raise InsufficientDataError(
            f"series of {n} increments cannot support max_lag {max_lag}"
        )
    if n < 10 * max_lag:
        warnings.warn(
            f"series of {n} increments is short for max_lag {max_lag}; "
            "estimates will be noisy",
            UserWarning,
            stacklevel=3,
        )


def _default_block_len(n: int, dt: float, params: ModelParams | None) -> int:
    if params is not None:
        block = int(round(10.0 / (params.alpha * dt)))
    else:
        block = int(round(5.0 * n ** (1.0 / 3.0)))
    return int(np.clip(block, 20, max(20, n // 4)))


def _leverage_values(dx: np.ndarray, max_lag: int, denom: float) -> np.ndarray:
    return np.array(
        [np.mean(dx[j:] ** 2 * dx[:-j]) for j in range(1, max_lag + 1)]
    ) / denom


def _leverage_denominator(
    dx: np.ndarray, dt: float, params: ModelParams | None
) -> float:
    if params is None:
        # raw coefficient: numerator / mean(dx^2)^2, no model normalization
        return float(np.mean(dx**2) ** 2)
    p, s_f = _LEVERAGE_MOMENT[params.kind]
    moment = float(np.mean(np.abs(dx) ** p)) / _ABS_NORMAL_MOMENT[p]
    return 2.0 * params.k * s_f * dt ** ((4.0 - p) / 2.0) * moment


def _autocorr_values(dx: np.ndarray, max_lag: int) -> np.ndarray:
    x2 = dx * dx
    m2 = x2.mean()
    denom = np.mean(x2 * x2) - m2 * m2
    return np.array(
        [(np.mean(x2[j:] * x2[:-j]) - m2 * m2) for j in range(1, max_lag + 1)]
    ) / denom


def _block_bootstrap_stderr(
    dx: np.ndarray,
    max_lag: int,
    stat,
    block_len: int,
    n_boot: int,
    seed: int,
) -> np.ndarray:
    rng = np.random.default_rng(seed)
    n = len(dx)
    block_len = min(block_len, n)
    n_blocks = int(np.ceil(n / block_len))
    out = np.empty((n_boot, max_lag))
    offsets = np.arange(block_len)
    for b in range(n_boot):
        starts = rng.integers(0, n - block_len + 1, n_blocks)
        idx = (starts[:, None] + offsets[None, :]).ravel()[:n]
        out[b] = stat(dx[idx])
    return out.std(axis=0, ddof=1)


def estimate_leverage(
    series: ReturnSeries,
    max_lag: int,
    params: ModelParams | None = None,
    block_len: int | None = None,
    n_boot: int = DEFAULT_BOOTSTRAP_RESAMPLES,
    seed: int = 0,
) -> CorrelationCurve:
    """Return-volatility correlation estimator on lags 1..max_lag.

    The raw coefficient at lag j is mean[dx_{t+j}^2 dx_t] / mean[dx^2]^2.
    When `params` is given the curve is normalized for direct comparison with
    the analytic leverage targets: the denominator is replaced by
    2 k s_f dt^{(4-p)/2} mean[|dx|^p] / E|z|^p, with (p, s_f) chosen per model
    so that the expected curve equals rho at lag 0+ (p = 3 for expou, 2 for
    vasicek, 2 with s_f = 1/2 for heston).  Using a same-order sample moment
    in the denominator also cancels the common volatility-level fluctuation
    of the numerator, which dominates the error of the plain ratio on long
    correlated series.

    Standard errors come from a moving-block bootstrap (block length defaults
    to 10 relaxation times when params are known).
    """
    dx = series.dx
    _check_lag_budget(len(dx), max_lag)
    denom = _leverage_denominator(dx, series.dt, params)
    values = _leverage_values(dx, max_lag, denom)
    block = block_len or _default_block_len(len(dx), series.dt, params)

    def stat(d: np.ndarray) -> np.ndarray:
        return _leverage_values(d, max_lag, _leverage_denominator(d, series.dt, params))

    stderr = _block_bootstrap_stderr(dx, max_lag, stat, block, n_boot, seed)
    lags = np.arange(1, max_lag + 1) * series.dt
    return CorrelationCurve(lags=lags, values=values, stderr=stderr)


def estimate_autocorr(
    series: ReturnSeries,
    max_lag: int,
    params: ModelParams | None = None,
    block_len: int | None = None,
    n_boot: int = DEFAULT_BOOTSTRAP_RESAMPLES,
    seed: int = 0,
) -> CorrelationCurve:
    """Squared-increment autocorrelation on lags 1..max_lag (lag 0 excluded).

    value_j = (mean[dx_t^2 dx_{t+j}^2] - mean[dx^2]^2)
              / (mean[dx^4] - mean[dx^2]^2);
    invariant under rescaling of dx.  Standard errors by moving-block
    bootstrap as for estimate_leverage.
    """
    dx = series.dx
    _check_lag_budget(len(dx), max_lag)
    values = _autocorr_values(dx, max_lag)
    block = block_len or _default_block_len(len(dx), series.dt, params)
    stderr = _block_bootstrap_stderr(
        dx, max_lag, lambda d: _autocorr_values(d, max_lag), block, n_boot, seed
    )
    lags = np.arange(1, max_lag + 1) * series.dt
    return CorrelationCurve(lags=lags, values=values, stderr=stderr)


def make_omega_grid(n_points: int = 4096, omega_max: float = 32.0) -> np.ndarray:
    """Uniform frequency grid [-omega_max, omega_max) with n_points entries.

    Half-open with the zero frequency at index n_points/2, matching the FFT
    inversion convention.
    """
    if n_points < 2 or (n_points & (n_points - 1)) != 0:
        raise InvalidParamsError("n_points must be a power of two >= 2")
    if not (omega_max > 0):
        raise InvalidParamsError("omega_max must be > 0")
    step = 2.0 * omega_max / n_points
    return -omega_max + step * np.arange(n_points)


def _is_uniform(grid: np.ndarray) -> bool:
    d = np.diff(grid)
    return bool(np.all(np.abs(d - d[0]) <= 1e-12 * max(abs(d[0]), 1e-300)))


def empirical_cf(samples: np.ndarray, omega_grid: np.ndarray) -> np.ndarray:
    """Empirical characteristic function phi(w) = mean(exp(i w x)).

    phi(0) is exactly 1.  On a uniform grid the evaluation uses a phase
    recurrence with Hermitian symmetry (samples are real), which is exact up
    to accumulated rounding of order n_grid * eps.
    """
    x = np.asarray(samples, dtype=float)
    if x.size == 0:
        raise InsufficientDataError("empirical_cf needs at least one sample")
    if not np.all(np.isfinite(x)):
        raise InvalidParamsError("samples contain non-finite entries")
    omega = np.asarray(omega_grid, dtype=float)
    n = x.size

    if omega.size >= 8 and _is_uniform(omega):
        step = omega[1] - omega[0]
        phi = np.empty(omega.size, dtype=complex)
        w_step = np.exp(1j * step * x)
        # start from the grid point closest to zero and recur outward
        j0 = int(np.argmin(np.abs(omega)))
        v = np.exp(1j * omega[j0] * x)
        phi[j0] = v.mean()
        up = v.copy()
        for j in range(j0 + 1, omega.size):
            up *= w_step
            phi[j] = up.mean()
        if j0 > 0:
            down = v
            conj_step = np.conj(w_step)
            for j in range(j0 - 1, -1, -1):
                down *= conj_step
                phi[j] = down.mean()
    else:
        phi = np.array([np.exp(1j * w * x).mean() for w in omega])

    phi[omega == 0.0] = 1.0 + 0.0j
    return phi


def invert_cf(
    phi: np.ndarray,
    omega_grid: np.ndarray,
    x_max: float | None = None,
    n_samples: int = 0,
    enforce_decay: bool = True,
) -> EmpiricalDensity:
    """Invert a characteristic function sampled on a uniform grid to a density.

    Uses the discrete Fourier transform with the continuous-transform phase
    and scale corrections; the output x grid is the conjugate uniform grid of
    spacing 2*pi / (n * domega).  Negative ripples are clipped at zero and
    their mass is reported on the result.  Raises GridTooCoarseError when the
    characteristic function has not decayed below 1e-3 at the grid edges, and
    warns when it is above 1e-6.  For an empirical CF (n_samples > 0) the
    edge magnitude never falls below the sampling floor ~1/sqrt(2N), so both
    thresholds are lifted to multiples of that floor: only an edge value
    confidently above the noise indicates genuine truncation.  Distributions
    with atoms never satisfy the decay condition; pass enforce_decay=False to
    invert them anyway (the point-mass limit concentrates in the central bin).
    """
    phi = np.asarray(phi, dtype=complex)
    omega = np.asarray(omega_grid, dtype=float)
    m = omega.size
    if phi.shape != omega.shape:
        raise InvalidParamsError("phi and omega_grid must share shape")
    if m < 256 or (m & (m - 1)) != 0:
        raise InvalidParamsError("omega grid must have 2^p points with p >= 8")
    if not _is_uniform(omega):
        raise InvalidParamsError("omega grid must be uniform")
    step = omega[1] - omega[0]
    if abs(omega[0] + 0.5 * m * step) > 1e-9 * m * step:
        raise InvalidParamsError("omega grid must start at -omega_max = -n/2 * step")

    edge = max(abs(phi[0]), abs(phi[-1]))
    noise_floor = math.sqrt(0.5 / n_samples) if n_samples > 0 else 0.0
    hard_limit = max(1e-3, 6.0 * noise_floor)
    soft_limit = max(1e-6, 3.0 * noise_floor)
    if edge > hard_limit and enforce_decay:
        raise GridTooCoarseError(
            f"|phi| = {edge:.3g} at the grid edge; extend omega_max"
        )
    if edge > soft_limit:
        warnings.warn(
            f"|phi| = {edge:.3g} at the grid edge exceeds {soft_limit:.3g}; "
            "inverted density may carry truncation ripples",
            UserWarning,
            stacklevel=2,
        )

    omega_max = -omega[0]
    dx = 2.0 * math.pi / (m * step)
    x = (np.arange(m) - m / 2) * dx
    signs = np.where(np.arange(m) % 2 == 0, 1.0, -1.0)
    spectrum = np.fft.fft(signs * phi)
    density = (step / (2.0 * math.pi)) * np.real(np.exp(1j * omega_max * x) * spectrum)

    clip_mass = float(-np.sum(density[density < 0]) * dx)
    density = np.maximum(density, 0.0)

    if x_max is not None:
        keep = np.abs(x) <= x_max
        if keep.sum() < 2:
            raise InvalidParamsError("x_max leaves fewer than 2 grid points")
        x, density = x[keep], density[keep]

    return EmpiricalDensity(
        grid=x,
        density=density,
        n_samples=n_samples,
        binwidth=dx,
        clip_mass=clip_mass,
    )


def freedman_diaconis_binwidth(samples: np.ndarray) -> float:
    q75, q25 = np.percentile(samples, [75, 25])
    iqr = q75 - q25
    if iqr <= 0:
        iqr = samples.std() or 1.0
    return 2.0 * iqr / len(samples) ** (1.0 / 3.0)


def histogram_density(
    samples: np.ndarray,
    binwidth: float | None = None,
    n_effective: float | None = None,
) -> EmpiricalDensity:
    """Histogram-based EmpiricalDensity with Freedman-Diaconis default bins."""
    x = np.asarray(samples, dtype=float)
    if x.size < 2:
        raise InsufficientDataError("histogram needs at least 2 samples")
    width = binwidth or freedman_diaconis_binwidth(x)
    lo, hi = x.min(), x.max()
    n_bins = max(int(math.ceil((hi - lo) / width)), 1)
    counts, edges = np.histogram(x, bins=n_bins, range=(lo, lo + n_bins * width))
    centers = 0.5 * (edges[:-1] + edges[1:])
    density = counts / (x.size * width)
    # pad with empty outer bins so the trapezoidal mass matches the bin mass
    centers = np.concatenate(([centers[0] - width], centers, [centers[-1] + width]))
    density = np.concatenate(([0.0], density, [0.0]))
    return EmpiricalDensity(
        grid=centers,
        density=density,
        n_samples=int(x.size),
        binwidth=width,
        n_effective=n_effective,
    )


def terminal_returns(
    params: ModelParams,
    horizon: float,
    n_paths: int,
    seed: int = 0,
    dt: float | None = None,
    n_workers: int | None = None,
) -> np.ndarray:
    """X(horizon) samples with Y(0) drawn from the stationary law.

    The stationary initialization implements the averaging over the initial
    volatility at its normal level.
    """
    if not (horizon > 0):
        raise InvalidParamsError(f"horizon must be > 0, got {horizon}")
    if dt is None:
        dt = min(1.0, 0.1 / params.alpha, horizon)
    n_steps = max(int(round(horizon / dt)), 1)
    config = PathConfig(
        dt=horizon / n_steps,
        n_steps=n_steps,
        n_paths=n_paths,
        seed=seed,
        record_stride=n_steps,
    )
    paths = simulate_paths(params, config, n_workers=n_workers, stationary_y0=True)
    return paths.x[:, -1]


def return_pdf_mc(
    params: ModelParams,
    horizon: float,
    n_paths: int,
    seed: int = 0,
    method: str = "histogram",
    dt: float | None = None,
    n_workers: int | None = None,
) -> EmpiricalDensity:
    """Monte Carlo density of the log-return at a horizon (days).

    Y(0) is drawn from the stationary volatility law.  method is "histogram"
    (Freedman-Diaconis) or "cf" (empirical characteristic function inverted
    by FFT on a 2^12 grid covering 8 / sample_std).
    """
    if n_paths < 10_000:
        warnings.warn(
            f"n_paths = {n_paths} is below 1e4; density carries low statistics",
            UserWarning,
            stacklevel=2,
        )
    x = terminal_returns(params, horizon, n_paths, seed=seed, dt=dt, n_workers=n_workers)
    if method == "histogram":
        return histogram_density(x)
    if method == "cf":
        std = float(x.std())
        if std <= 0:
            raise InsufficientDataError("degenerate samples: zero variance")
        omega = make_omega_grid(4096, 8.0 / std)
        phi = empirical_cf(x, omega)
        limit = 1.05 * float(np.max(np.abs(x))) + 4.0 * std
        out = invert_cf(phi, omega, x_max=limit, n_samples=len(x))
        return out
    raise InvalidParamsError(f"unknown density method {method!r}")


def sample_moments(samples: np.ndarray) -> tuple[float, float, float, float]:
    """(mean, unbiased variance, skewness, excess kurtosis) of a sample.

    Skewness and kurtosis are the standardized central moment ratios
    m3 / m2^1.5 and m4 / m2^2 - 3 with biased central moments.
    """
    x = np.asarray(samples, dtype=float)
    if x.size < 2:
        raise InsufficientDataError("sample moments need at least 2 samples")
    mean = float(x.mean())
    c = x - mean
    m2 = float(np.mean(c**2))
    m3 = float(np.mean(c**3))
    m4 = float(np.mean(c**4))
    var = m2 * x.size / (x.size - 1)
    if m2 == 0:
        return mean, 0.0, 0.0, 0.0
    return mean, var, m3 / m2**1.5, m4 / (m2 * m2) - 3.0
