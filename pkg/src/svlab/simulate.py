"""Euler-Maruyama Monte Carlo engine for the coupled (X, Y) system.

Reproducibility contract
------------------------
Randomness is derived from the master seed by a splittable construction:
``numpy.random.SeedSequence(seed)`` is spawned into one child per block of
``BLOCK_SIZE`` paths, and each block is integrated with its own PCG64
generator.  Normal deviates come from ``Generator.standard_normal`` (numpy's
ziggurat method); at every step one (2, block) matrix is drawn, row 0 feeding
dW1 and row 1 the independent component of dW2.  Because a block's stream
depends only on (seed, block index), results are bit-identical for any number
of workers and any scheduling order.

Worker count is taken from the ``SVLAB_THREADS`` environment variable unless
passed explicitly; blocks are distributed over a thread pool and written into
preallocated output slices.
"""

from __future__ import annotations

import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParamsError, NonFiniteStateError
from .models import ModelKind, ModelParams, SdeCoefficients, coefficients

TRADING_DAYS_PER_YEAR = 252
BLOCK_SIZE = 1024

# soft threshold from the time-step rule: dt much shorter than 1/alpha
DT_ALPHA_SOFT_LIMIT = 0.1


@dataclass(frozen=True)
class PathConfig:
    """Discretization and ensemble settings for one simulation run.

    dt is in days; n_steps of size dt are taken; every record_stride-th step
    is stored (step 0 and the final step are always stored).
    """

    dt: float
    n_steps: int
    n_paths: int = 1
    seed: int = 0
    record_stride: int = 1

    def __post_init__(self):
        if not (self.dt > 0):
            raise InvalidParamsError(f"dt must be > 0, got {self.dt}")
        if self.n_steps < 0:
            raise InvalidParamsError(f"n_steps must be >= 0, got {self.n_steps}")
        if self.n_paths < 1:
            raise InvalidParamsError(f"n_paths must be >= 1, got {self.n_paths}")
        if self.record_stride < 1:
            raise InvalidParamsError(
                f"record_stride must be >= 1, got {self.record_stride}"
            )
        if not (0 <= self.seed < 2**64):
            raise InvalidParamsError("seed must be an unsigned 64-bit integer")

    def soft_warnings(self, params: ModelParams) -> list[str]:
        out = []
        if params.alpha * self.dt > DT_ALPHA_SOFT_LIMIT:
            out.append(
                f"dt*alpha = {params.alpha * self.dt:.4g} exceeds "
                f"{DT_ALPHA_SOFT_LIMIT}; the step is not small against the "
                "mean-reversion time and Euler bias may be visible"
            )
        return out

    def recorded_steps(self) -> np.ndarray:
        """Indices of stored steps: 0, stride, 2*stride, ..., plus the last step."""
        steps = np.arange(0, self.n_steps + 1, self.record_stride)
        if steps[-1] != self.n_steps:
            steps = np.append(steps, self.n_steps)
        return steps


@dataclass(frozen=True)
class WienerPair:
    """Correlated Wiener increments; dw1 drives X, dw2 drives Y."""

    dw1: np.ndarray
    dw2: np.ndarray


@dataclass(frozen=True)
class PathSet:
    """Recorded Monte Carlo ensemble.

    x, y and integrated_var have shape (n_paths, n_recorded); times holds the
    recorded step times in days.  integrated_var[i, j] is the left-Riemann
    accumulation of sigma^2 dt along path i up to times[j].
    """

    config: PathConfig
    params: ModelParams
    times: np.ndarray
    x: np.ndarray
    y: np.ndarray
    integrated_var: np.ndarray

    @property
    def n_paths(self) -> int:
        return self.x.shape[0]

    @property
    def n_recorded(self) -> int:
        return self.x.shape[1]

    def sigma(self) -> np.ndarray:
        """Volatility sigma = f(Y) at every recorded point."""
        return np.asarray(coefficients(self.params).vol_map(self.y))

    def return_increments(self, path: int = 0) -> np.ndarray:
        """Per-record increments of X along one path (needs record_stride data)."""
        return np.diff(self.x[path])


def correlated_increments(
    rho: float,
    dt: float,
    rng: np.random.Generator,
    size: int | tuple[int, ...] | None = None,
) -> WienerPair:
    """Draw a correlated Wiener increment pair.

    Draws independent standard normals z1, z scaled by sqrt(dt) and returns
    dw1 = sqrt(dt) z1,  dw2 = rho*dw1 + sqrt(1-rho^2)*sqrt(dt)*z.
    """
    if not (-1.0 <= rho <= 1.0):
        raise InvalidParamsError(f"rho must lie in [-1, 1], got {rho}")
    if not (dt > 0):
        raise InvalidParamsError(f"dt must be > 0, got {dt}")
    shape = (2,) if size is None else (2,) + (tuple(np.atleast_1d(size)))
    z = rng.standard_normal(shape)
    sqdt = math.sqrt(dt)
    dw1 = sqdt * z[0]
    dw2 = rho * dw1 + math.sqrt(1.0 - rho * rho) * sqdt * z[1]
    if size is None:
        return WienerPair(dw1=float(dw1), dw2=float(dw2))
    return WienerPair(dw1=dw1, dw2=dw2)


def euler_step(coeffs: SdeCoefficients, state, dt: float, w: WienerPair):
    """One explicit Euler-Maruyama step of the coupled system.

    state is an (x, y) pair of scalars or arrays; returns the stepped pair.
    Raises NonFiniteStateError if the step produces NaN or infinity.
    """
    if not (dt > 0):
        raise InvalidParamsError(f"dt must be > 0, got {dt}")
    x, y = state
    x_new = x + coeffs.vol_map(y) * w.dw1
    y_new = y + coeffs.drift_y(y) * dt + coeffs.diff_y(y) * w.dw2
    if not (np.all(np.isfinite(x_new)) and np.all(np.isfinite(y_new))):
        bad = np.argmax(~(np.isfinite(np.atleast_1d(x_new)) & np.isfinite(np.atleast_1d(y_new))))
        raise NonFiniteStateError(path_index=int(bad), step=-1)
    return x_new, y_new


def _stationary_y_draw(
    params: ModelParams, rng: np.random.Generator, n: int
) -> np.ndarray:
    """Draw Y(0) from the stationary law of the driving process."""
    beta = params.k**2 / (2.0 * params.alpha)
    if params.kind is ModelKind.HESTON:
        shape = 2.0 * params.alpha * params.m / params.k**2
        return rng.gamma(shape, beta, size=n)
    return rng.normal(params.reversion_level, math.sqrt(beta), size=n)


def _simulate_block(
    params: ModelParams,
    config: PathConfig,
    seed_seq: np.random.SeedSequence,
    n_block: int,
    record_steps: np.ndarray,
    out_x: np.ndarray,
    out_y: np.ndarray,
    out_iv: np.ndarray,
    path_offset: int,
    stationary_y0: bool,
) -> None:
    rng = np.random.Generator(np.random.PCG64(seed_seq))
    coeffs = coefficients(params)
    dt = config.dt
    sqdt = math.sqrt(dt)
    rho = params.rho
    rho_c = math.sqrt(1.0 - rho * rho)

    x = np.zeros(n_block)
    # the stationary draw, when requested, consumes the block stream first
    if stationary_y0:
        y = _stationary_y_draw(params, rng, n_block)
    else:
        y = np.full(n_block, float(params.y0))
    iv = np.zeros(n_block)

    rec_pos = 0
    if record_steps[0] == 0:
        out_x[:, 0] = x
        out_y[:, 0] = y
        out_iv[:, 0] = iv
        rec_pos = 1

    for step in range(1, config.n_steps + 1):
        z = rng.standard_normal((2, n_block))
        dw1 = sqdt * z[0]
        dw2 = rho * dw1 + rho_c * sqdt * z[1]
        sigma = coeffs.vol_map(y)
        x = x + sigma * dw1
        iv = iv + sigma * sigma * dt
        y = y + coeffs.drift_y(y) * dt + coeffs.diff_y(y) * dw2
        finite = np.isfinite(x) & np.isfinite(y)
        if not finite.all():
            raise NonFiniteStateError(
                path_index=path_offset + int(np.argmax(~finite)), step=step
            )
        if rec_pos < len(record_steps) and record_steps[rec_pos] == step:
            out_x[:, rec_pos] = x
            out_y[:, rec_pos] = y
            out_iv[:, rec_pos] = iv
            rec_pos += 1


def _resolve_workers(n_workers: int | None) -> int:
    if n_workers is None:
        try:
            n_workers = int(os.environ.get("SVLAB_THREADS", "1"))
        except ValueError:
            n_workers = 1
    return max(1, n_workers)


def simulate_paths(
    params: ModelParams,
    config: PathConfig,
    n_workers: int | None = None,
    stationary_y0: bool = False,
) -> PathSet:
    """Generate a PathSet of independent trajectories.

    Deterministic for fixed (params, config): the same seed yields
    bit-identical output for any worker count.  With stationary_y0 each path
    starts from an independent draw of the stationary law of Y instead of
    the fixed params.y0.
    """
    for msg in config.soft_warnings(params):
        warnings.warn(msg, UserWarning, stacklevel=2)

    record_steps = config.recorded_steps()
    n_rec = len(record_steps)
    n_paths = config.n_paths
    x = np.empty((n_paths, n_rec))
    y = np.empty((n_paths, n_rec))
    iv = np.empty((n_paths, n_rec))

    n_blocks = (n_paths + BLOCK_SIZE - 1) // BLOCK_SIZE
    children = np.random.SeedSequence(config.seed).spawn(n_blocks)

    def run_block(b: int) -> None:
        lo = b * BLOCK_SIZE
        hi = min(lo + BLOCK_SIZE, n_paths)
        _simulate_block(
            params,
            config,
            children[b],
            hi - lo,
            record_steps,
            x[lo:hi],
            y[lo:hi],
            iv[lo:hi],
            lo,
            stationary_y0,
        )

    workers = _resolve_workers(n_workers)
    if workers == 1 or n_blocks == 1:
        for b in range(n_blocks):
            run_block(b)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            # re-raise the first failure, if any
            list(pool.map(run_block, range(n_blocks)))

    return PathSet(
        config=config,
        params=params,
        times=record_steps * config.dt,
        x=x,
        y=y,
        integrated_var=iv,
    )


def single_long_series(
    params: ModelParams,
    years: int,
    dt: float = 1.0,
    seed: int = 0,
    n_workers: int | None = None,
) -> PathSet:
    """One path covering `years` trading years (252 days each), every step recorded.

    This is the series the correlation estimators consume.
    """
    if years < 1:
        raise InvalidParamsError(f"years must be >= 1, got {years}")
    n_steps = int(round(years * TRADING_DAYS_PER_YEAR / dt))
    config = PathConfig(dt=dt, n_steps=n_steps, n_paths=1, seed=seed, record_stride=1)
    return simulate_paths(params, config, n_workers=n_workers)
