from __future__ import annotations

from datetime import date, timedelta

import numpy as np
import pytest
from hypothesis import settings

from svlab import ModelParams, PriceSeries, single_long_series

# keep property tests reproducible run-to-run
settings.register_profile("deterministic", derandomize=True)
settings.load_profile("deterministic")


def synthetic_prices(
    params: ModelParams,
    n_days: int,
    seed: int,
    scale: float = 0.01,
    s0: float = 100.0,
    symbol: str = "synthetic",
) -> PriceSeries:
    """Price series driven by simulated model returns, rescaled to a
    realistic daily-volatility level (the model's own sigma is O(1)/day)."""
    years = max(1, -(-n_days // 252))
    paths = single_long_series(params, years=years, dt=1.0, seed=seed)
    dx = np.diff(paths.x[0])[:n_days] * scale
    closes = s0 * np.exp(np.concatenate(([0.0], np.cumsum(dx))))
    d0 = date(1990, 1, 2)
    dates = tuple(d0 + timedelta(days=i) for i in range(len(closes)))
    return PriceSeries(dates=dates, closes=closes, symbol=symbol)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20260808)
