"""Run configuration: sectioned key-value text, parsed strictly.

Format is INI-style with four sections; unknown sections or keys are
rejected so typos fail loudly.  A minimal file:

    [model]
    kind = expou
    alpha = 0.1
    k = 0.22

    [simulation]
    dt = 1.0
    n_steps = 252
    seed = 7

Every key of [estimators] and [output] has a default; see KEY_REFERENCE.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass

from .errors import ConfigError
from .models import ModelKind, ModelParams

KEY_REFERENCE: dict[str, dict[str, str]] = {
    "model": {
        "kind": "vasicek | heston | expou (required)",
        "alpha": "mean-reversion rate, 1/day (required)",
        "m": "reversion level (default 0.04 heston, 0.2 vasicek, fixed 0 expou)",
        "k": "vol-of-vol, 1/sqrt(day) (required)",
        "rho": "return-volatility correlation (default 0)",
        "mu": "price drift, 1/day (default 0)",
        "y0": "initial driving value (default: reversion level)",
        "s0": "initial price (default 100)",
    },
    "simulation": {
        "dt": "time step in days (required)",
        "n_steps": "number of Euler steps (required for simulate)",
        "n_paths": "ensemble size (default 1)",
        "seed": "64-bit master seed (default 0)",
        "record_stride": "store every s-th step (default 1)",
    },
    "estimators": {
        "max_lag": "correlation lags to estimate (default 40)",
        "years": "length of the long correlation series (default 100)",
        "n_boot": "bootstrap resamples for stderr (default 200)",
        "block_len": "bootstrap block length in steps (default 10/(alpha dt))",
        "horizons": "comma-separated day counts for densities (default 1,5,20)",
        "pdf_paths": "Monte Carlo paths for return densities (default 20000)",
        "pdf_method": "histogram | cf (default histogram)",
    },
    "output": {
        "directory": "output directory (default .)",
        "format": "csv | binary for path dumps (default csv)",
    },
}

_MODEL_DEFAULT_M = {ModelKind.VASICEK: 0.2, ModelKind.HESTON: 0.04, ModelKind.EXP_OU: 0.0}


@dataclass(frozen=True)
class RunConfig:
    """Validated run configuration shared by CLI commands and the service."""

    params: ModelParams
    dt: float
    n_steps: int
    n_paths: int = 1
    seed: int = 0
    record_stride: int = 1
    max_lag: int = 40
    years: int = 100
    n_boot: int = 200
    block_len: int | None = None
    horizons: tuple[int, ...] = (1, 5, 20)
    pdf_paths: int = 20_000
    pdf_method: str = "histogram"
    directory: str = "."
    format: str = "csv"


def _get(section, key, cast, default=None, required=False, name=""):
    raw = section.get(key)
    if raw is None:
        if required:
            raise ConfigError(f"missing required key {name}.{key}")
        return default
    try:
        return cast(raw)
    except (ValueError, KeyError) as exc:
        raise ConfigError(f"bad value for {name}.{key}: {raw!r} ({exc})") from None


def _parse_horizons(raw: str) -> tuple[int, ...]:
    parts = [p.strip() for p in raw.split(",") if p.strip()]
    horizons = tuple(int(p) for p in parts)
    if not horizons:
        raise ValueError("empty horizon list")
    return horizons


def parse_config(text: str) -> RunConfig:
    """Parse configuration text; raises ConfigError with field diagnostics."""
    cp = configparser.ConfigParser(interpolation=None)
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"config parse failure: {exc}") from None

    for section in cp.sections():
        if section not in KEY_REFERENCE:
            raise ConfigError(f"unknown section [{section}]")
        for key in cp[section]:
            if key not in KEY_REFERENCE[section]:
                raise ConfigError(f"unknown key {section}.{key}")

    if "model" not in cp:
        raise ConfigError("missing required section [model]")
    if "simulation" not in cp:
        raise ConfigError("missing required section [simulation]")

    model = cp["model"]
    kind = _get(model, "kind", lambda v: ModelKind(v.strip().lower()), required=True, name="model")
    m_default = _MODEL_DEFAULT_M[kind]
    m = _get(model, "m", float, default=m_default, name="model")
    params_kwargs = {
        "kind": kind,
        "alpha": _get(model, "alpha", float, required=True, name="model"),
        "m": m,
        "k": _get(model, "k", float, required=True, name="model"),
        "rho": _get(model, "rho", float, default=0.0, name="model"),
        "mu": _get(model, "mu", float, default=0.0, name="model"),
        "s0": _get(model, "s0", float, default=100.0, name="model"),
    }
    y0_default = 0.0 if kind is ModelKind.EXP_OU else m
    params_kwargs["y0"] = _get(model, "y0", float, default=y0_default, name="model")
    try:
        params = ModelParams(**params_kwargs)
    except Exception as exc:
        raise ConfigError(f"invalid [model] parameters: {exc}") from None

    sim = cp["simulation"]
    est = cp["estimators"] if "estimators" in cp else {}
    out = cp["output"] if "output" in cp else {}

    pdf_method = _get(est, "pdf_method", str, default="histogram", name="estimators")
    if pdf_method not in ("histogram", "cf"):
        raise ConfigError(f"bad value for estimators.pdf_method: {pdf_method!r}")
    fmt = _get(out, "format", str, default="csv", name="output")
    if fmt not in ("csv", "binary"):
        raise ConfigError(f"bad value for output.format: {fmt!r}")

    try:
        return RunConfig(
            params=params,
            dt=_get(sim, "dt", float, required=True, name="simulation"),
            n_steps=_get(sim, "n_steps", int, default=0, name="simulation"),
            n_paths=_get(sim, "n_paths", int, default=1, name="simulation"),
            seed=_get(sim, "seed", int, default=0, name="simulation"),
            record_stride=_get(sim, "record_stride", int, default=1, name="simulation"),
            max_lag=_get(est, "max_lag", int, default=40, name="estimators"),
            years=_get(est, "years", int, default=100, name="estimators"),
            n_boot=_get(est, "n_boot", int, default=200, name="estimators"),
            block_len=_get(est, "block_len", int, default=None, name="estimators"),
            horizons=_get(est, "horizons", _parse_horizons, default=(1, 5, 20), name="estimators"),
            pdf_paths=_get(est, "pdf_paths", int, default=20_000, name="estimators"),
            pdf_method=pdf_method,
            directory=_get(out, "directory", str, default=".", name="output"),
            format=fmt,
        )
    except ConfigError:
        raise
    except Exception as exc:
        raise ConfigError(f"invalid configuration: {exc}") from None


def key_reference_text() -> str:
    """Generated reference of every config key, for docs and --help."""
    lines = []
    for section, keys in KEY_REFERENCE.items():
        lines.append(f"[{section}]")
        for key, doc in keys.items():
            lines.append(f"  {key:<14} {doc}")
        lines.append("")
    return "\n".join(lines)
