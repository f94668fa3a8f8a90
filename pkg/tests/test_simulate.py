import math

import numpy as np
import pytest

from svlab import (
    InvalidParamsError,
    ModelParams,
    NonFiniteStateError,
    PathConfig,
    WienerPair,
    coefficients,
    correlated_increments,
    euler_step,
    simulate_paths,
    single_long_series,
)

VAS = ModelParams(kind="vasicek", alpha=1.0, m=0.2, k=0.1, rho=-0.5, y0=0.1)


def test_correlated_increments_degenerate_rho():
    rng = np.random.default_rng(0)
    w = correlated_increments(1.0, 0.5, rng, size=1000)
    assert np.array_equal(w.dw1, w.dw2)


def test_correlated_increments_sample_correlation():
    rng = np.random.default_rng(7)
    w0 = correlated_increments(0.0, 1.0, rng, size=10**6)
    c0 = np.corrcoef(w0.dw1, w0.dw2)[0, 1]
    assert abs(c0) < 3e-3

    w5 = correlated_increments(-0.5, 1.0, rng, size=10**6)
    c5 = np.corrcoef(w5.dw1, w5.dw2)[0, 1]
    assert c5 == pytest.approx(-0.5, abs=3e-3)


def test_correlated_increments_marginals():
    rng = np.random.default_rng(11)
    dt = 0.25
    w = correlated_increments(0.3, dt, rng, size=10**6)
    se = math.sqrt(dt / 10**6)
    assert abs(w.dw1.mean()) < 4 * se
    assert w.dw1.var() == pytest.approx(dt, rel=0.01)
    assert w.dw2.var() == pytest.approx(dt, rel=0.01)


def test_correlated_increments_validation():
    rng = np.random.default_rng(0)
    with pytest.raises(InvalidParamsError):
        correlated_increments(1.5, 1.0, rng)
    with pytest.raises(InvalidParamsError):
        correlated_increments(0.0, 0.0, rng)


def test_euler_step_deterministic_vasicek():
    c = coefficients(VAS)
    x, y = euler_step(c, (0.0, 0.1), 0.01, WienerPair(0.0, 0.0))
    assert y == pytest.approx(0.101)
    assert x == 0.0


def test_euler_step_heston_truncation():
    p = ModelParams(kind="heston", alpha=5.0, m=0.04, k=0.6, rho=0.0, y0=0.04)
    c = coefficients(p)
    x, y = euler_step(c, (0.7, -0.01), 0.01, WienerPair(0.0, 0.0))
    assert y == pytest.approx(-0.0075)
    assert x == pytest.approx(0.7)  # vol_map(-0.01) = 0 under truncation


def test_euler_step_expou_identity_at_zero():
    p = ModelParams(kind="expou", alpha=1.0, m=0.0, k=0.5, rho=0.0)
    c = coefficients(p)
    h = 0.37
    x, y = euler_step(c, (1.0, 0.0), 0.5, WienerPair(h, 0.0))
    assert x == pytest.approx(1.0 + h)
    assert y == 0.0


def test_path_config_validation():
    with pytest.raises(InvalidParamsError):
        PathConfig(dt=0.0, n_steps=1)
    with pytest.raises(InvalidParamsError):
        PathConfig(dt=1.0, n_steps=-1)
    with pytest.raises(InvalidParamsError):
        PathConfig(dt=1.0, n_steps=1, n_paths=0)
    with pytest.raises(InvalidParamsError):
        PathConfig(dt=1.0, n_steps=1, record_stride=0)
    with pytest.raises(InvalidParamsError):
        PathConfig(dt=1.0, n_steps=1, seed=-1)


def test_simulate_initial_conditions_only():
    ps = simulate_paths(VAS, PathConfig(dt=1.0, n_steps=0, n_paths=1, seed=4))
    assert ps.x.shape == (1, 1)
    assert ps.x[0, 0] == 0.0
    assert ps.y[0, 0] == VAS.y0


def test_simulate_initial_conditions_ensemble():
    ps = simulate_paths(VAS, PathConfig(dt=0.01, n_steps=5, n_paths=300, seed=4))
    assert np.all(ps.x[:, 0] == 0.0)
    assert np.all(ps.y[:, 0] == VAS.y0)
    assert np.all(np.diff(ps.integrated_var, axis=1) >= 0)


def test_constant_volatility_brownian_limit():
    # k -> 0 keeps Y pinned at m; X is Brownian with variance m^2 t
    p = ModelParams(kind="vasicek", alpha=1.0, m=0.2, k=1e-12, rho=0.0, y0=0.2)
    t = 4.0
    ps = simulate_paths(p, PathConfig(dt=0.05, n_steps=80, n_paths=10_000, seed=21))
    var = ps.x[:, -1].var()
    assert var == pytest.approx(p.m**2 * t, rel=0.05)


def test_expou_longrun_variance_oracle():
    # k^2 / (2 alpha) = 0.01 / 0.02 = 0.5
    p = ModelParams(kind="expou", alpha=0.01, m=0.0, k=0.1, rho=0.0, y0=0.0)
    ps = simulate_paths(p, PathConfig(dt=1.0, n_steps=25_000, n_paths=1, seed=3))
    longrun = ps.y[0, 5000:]
    assert longrun.var() == pytest.approx(0.5, rel=0.10)


def test_determinism_across_worker_counts():
    config = PathConfig(dt=0.02, n_steps=40, n_paths=2500, seed=99)
    a = simulate_paths(VAS, config, n_workers=1)
    b = simulate_paths(VAS, config, n_workers=4)
    assert np.array_equal(a.x, b.x)
    assert np.array_equal(a.y, b.y)
    assert np.array_equal(a.integrated_var, b.integrated_var)
    c = simulate_paths(VAS, PathConfig(dt=0.02, n_steps=40, n_paths=2500, seed=100))
    assert not np.array_equal(a.x, c.x)


def test_env_var_worker_cap(monkeypatch):
    config = PathConfig(dt=0.02, n_steps=10, n_paths=2100, seed=5)
    baseline = simulate_paths(VAS, config, n_workers=1)
    monkeypatch.setenv("SVLAB_THREADS", "3")
    from_env = simulate_paths(VAS, config)
    assert np.array_equal(baseline.x, from_env.x)


def test_zero_noise_relaxation_error_first_order():
    c = coefficients(VAS)
    exact = lambda t: VAS.m + (VAS.y0 - VAS.m) * math.exp(-VAS.alpha * t)

    def max_error(dt):
        x, y = 0.0, VAS.y0
        worst = 0.0
        for n in range(1, int(4.0 / dt) + 1):
            x, y = euler_step(c, (x, y), dt, WienerPair(0.0, 0.0))
            worst = max(worst, abs(y - exact(n * dt)))
            assert x == 0.0
        return worst

    e1, e2 = max_error(0.05), max_error(0.025)
    assert e1 < 0.05 * VAS.alpha * abs(VAS.y0 - VAS.m)  # bounded linearly in dt
    assert e1 / e2 == pytest.approx(2.0, rel=0.2)


def test_record_stride_and_final_step():
    config = PathConfig(dt=0.5, n_steps=11, n_paths=2, seed=1, record_stride=4)
    ps = simulate_paths(VAS, config)
    assert list(config.recorded_steps()) == [0, 4, 8, 11]
    assert ps.times[-1] == pytest.approx(11 * 0.5)
    full = simulate_paths(VAS, PathConfig(dt=0.5, n_steps=11, n_paths=2, seed=1))
    assert np.array_equal(ps.x[:, -1], full.x[:, -1])


def test_single_long_series_lengths():
    ps = single_long_series(VAS, years=1, dt=0.5, seed=2)
    assert ps.config.n_steps == 504
    assert ps.x.shape == (1, 505)
    p_small = ModelParams(kind="vasicek", alpha=0.01, m=0.2, k=0.02, rho=0.0, y0=0.2)
    ps100 = single_long_series(p_small, years=100, dt=1.0, seed=2)
    assert ps100.config.n_steps == 25_200
    assert len(np.diff(ps100.x[0])) == 25_200


def test_single_long_series_rejects_zero_years():
    with pytest.raises(InvalidParamsError):
        single_long_series(VAS, years=0)


def test_dt_alpha_soft_warning():
    with pytest.warns(UserWarning, match="mean-reversion"):
        simulate_paths(VAS, PathConfig(dt=0.2, n_steps=2, n_paths=1, seed=0))


def test_non_finite_blowup_reports_path_and_step():
    p = ModelParams(kind="expou", alpha=1.0, m=0.0, k=10.0, rho=0.0, y0=0.0)
    with pytest.warns(UserWarning):
        with pytest.raises(NonFiniteStateError) as err:
            simulate_paths(p, PathConfig(dt=1000.0, n_steps=50, n_paths=2, seed=1))
    assert err.value.step >= 1
    assert 0 <= err.value.path_index < 2


def test_stationary_y0_matches_law():
    p = ModelParams(kind="heston", alpha=0.5, m=0.04, k=0.1, rho=0.0, y0=0.04)
    ps = simulate_paths(
        p, PathConfig(dt=0.01, n_steps=0, n_paths=50_000, seed=8), stationary_y0=True
    )
    y0 = ps.y[:, 0]
    beta = p.k**2 / (2 * p.alpha)
    assert y0.mean() == pytest.approx(p.m, rel=0.02)
    assert y0.var() == pytest.approx(p.m * beta, rel=0.05)
    assert np.all(y0 >= 0)


def test_sigma_accessor_matches_vol_map():
    ps = simulate_paths(VAS, PathConfig(dt=0.01, n_steps=10, n_paths=3, seed=6))
    assert np.array_equal(ps.sigma(), ps.y)  # vasicek: sigma = Y


def test_heston_truncation_keeps_sigma_real():
    # Feller violated: paths do cross zero, truncation keeps sigma finite >= 0
    p = ModelParams(kind="heston", alpha=0.5, m=0.01, k=0.3, rho=-0.5, y0=0.01)
    ps = simulate_paths(p, PathConfig(dt=0.05, n_steps=400, n_paths=64, seed=12))
    assert np.any(ps.y < 0)
    sigma = ps.sigma()
    assert np.all(np.isfinite(sigma))
    assert np.all(sigma >= 0)


def test_integrated_var_constant_vol_exact():
    p = ModelParams(kind="vasicek", alpha=1.0, m=0.2, k=1e-12, rho=0.0, y0=0.2)
    ps = simulate_paths(p, PathConfig(dt=0.05, n_steps=80, n_paths=4, seed=2))
    assert np.allclose(ps.integrated_var[:, -1], 0.2**2 * 4.0, rtol=1e-9)


def test_return_increments_helper():
    ps = simulate_paths(VAS, PathConfig(dt=0.01, n_steps=10, n_paths=2, seed=6))
    assert np.array_equal(ps.return_increments(1), np.diff(ps.x[1]))
