"""svlab: a numerical laboratory for correlated stochastic volatility models.

Simulates the coupled volatility-return SDEs of the vasicek, heston and
exponential Ornstein-Uhlenbeck models, checks the simulated statistics
against their closed-form targets, and calibrates distribution families to
price series by maximum likelihood.
"""

__version__ = "0.1.0"

from .analytic import (
    DensityFamily,
    GammaDensity,
    LogNormalDensity,
    NormalDensity,
    StudentTDensity,
    autocorr_analytic,
    beta_coefficient,
    leverage_analytic,
    leverage_exact,
    stationary_volatility_pdf,
    transient_mean,
    transient_moments,
)
from .calibrate import (
    FitResult,
    PriceSeries,
    fit_mle,
    fit_returns,
    fit_volatility_all,
    multi_horizon_densities,
    nelder_mead,
    volatility_proxy,
)
from .errors import (
    ConfigError,
    DomainError,
    GridTooCoarseError,
    InsufficientDataError,
    InvalidParamsError,
    NonFiniteStateError,
    PriceCsvError,
    SvlabError,
    UnsupportedModelError,
    UnsupportedMomentError,
)
from .estimators import (
    CorrelationCurve,
    EmpiricalDensity,
    ReturnSeries,
    empirical_cf,
    estimate_autocorr,
    estimate_leverage,
    invert_cf,
    make_omega_grid,
    return_pdf_mc,
    sample_moments,
    terminal_returns,
)
from .models import (
    ModelKind,
    ModelParams,
    SdeCoefficients,
    coefficients,
    log_return_to_price,
    price_to_log_return,
    validate,
)
from .simulate import (
    PathConfig,
    PathSet,
    WienerPair,
    correlated_increments,
    euler_step,
    simulate_paths,
    single_long_series,
)

__all__ = [name for name in dir() if not name.startswith("_")]
