"""Command implementations shared by the FastAPI routes and the CLI client.

Each operation consumes a request model and returns a RunResponse whose
files are ready to write to disk.  Soft warnings raised by the core modules
are captured and surfaced in the response.
"""

from __future__ import annotations

import base64
import warnings
from contextlib import contextmanager

from .. import dataio
from ..analytic import autocorr_analytic, leverage_analytic
from ..calibrate import fit_returns, fit_volatility_all, multi_horizon_densities
from ..errors import UnsupportedModelError
from ..estimators import (
    ReturnSeries,
    estimate_autocorr,
    estimate_leverage,
    return_pdf_mc,
)
from ..simulate import PathConfig, simulate_paths, single_long_series
from .schemas import (
    CorrelationsRequest,
    FilePayload,
    FitRequest,
    PdfRequest,
    RunResponse,
    SimulateRequest,
)

HESTON_LEVERAGE_NOTE = "no analytic leverage target for the heston model"


@contextmanager
def _collect_warnings(into: list[str]):
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        yield
    into.extend(str(w.message) for w in caught)


def _text_file(name: str, text: str) -> FilePayload:
    return FilePayload(name=name, kind="text", text=text)


def _binary_file(name: str, blob: bytes) -> FilePayload:
    return FilePayload(name=name, kind="binary", b64=base64.b64encode(blob).decode())


def _request_digest(request) -> dict[str, str]:
    return {"request": dataio.sha256_hex(request.model_dump_json())}


def run_simulate(req: SimulateRequest, extra_inputs: dict[str, str] | None = None) -> RunResponse:
    params = req.model.to_core()
    config = PathConfig(
        dt=req.simulation.dt,
        n_steps=req.simulation.n_steps,
        n_paths=req.simulation.n_paths,
        seed=req.simulation.seed,
        record_stride=req.simulation.record_stride,
    )
    warns: list[str] = []
    with _collect_warnings(warns):
        paths = simulate_paths(params, config)

    if req.format == "binary":
        files = [_binary_file("paths.bin", dataio.paths_to_binary(paths))]
    else:
        files = [_text_file("paths.csv", dataio.paths_to_csv(paths))]

    manifest = dataio.build_manifest(
        command="simulate",
        params=params,
        settings=req.simulation.model_dump() | {"format": req.format},
        seed=req.simulation.seed,
        input_digests=_request_digest(req) | (extra_inputs or {}),
        output_files=[f.name for f in files],
    )
    return RunResponse(files=files, manifest=manifest, warnings=warns)


def run_pdf(req: PdfRequest, extra_inputs: dict[str, str] | None = None) -> RunResponse:
    params = req.model.to_core()
    warns: list[str] = []
    files: list[FilePayload] = []
    summary = ["horizon,n_samples,variance,excess_kurtosis"]
    with _collect_warnings(warns):
        for i, horizon in enumerate(req.horizons):
            density = return_pdf_mc(
                params,
                horizon,
                req.n_paths,
                seed=req.seed + i,
                method=req.method,
                dt=req.dt,
            )
            var, kurt = density.variance(), density.excess_kurtosis()
            files.append(
                _text_file(
                    f"pdf_h{horizon:g}.csv",
                    dataio.density_to_csv(
                        density,
                        extra={"horizon": horizon, "variance": var, "excess_kurtosis": kurt},
                    ),
                )
            )
            summary.append(
                "%g,%d,%.12g,%.12g" % (horizon, density.n_samples, var, kurt)
            )
    files.append(_text_file("pdf_summary.csv", "\n".join(summary) + "\n"))

    manifest = dataio.build_manifest(
        command="pdf",
        params=params,
        settings={
            "horizons": list(req.horizons),
            "n_paths": req.n_paths,
            "dt": req.dt,
            "method": req.method,
        },
        seed=req.seed,
        input_digests=_request_digest(req) | (extra_inputs or {}),
        output_files=[f.name for f in files],
    )
    return RunResponse(files=files, manifest=manifest, warnings=warns)


def run_correlations(
    req: CorrelationsRequest, extra_inputs: dict[str, str] | None = None
) -> RunResponse:
    params = req.model.to_core()
    warns: list[str] = []
    with _collect_warnings(warns):
        paths = single_long_series(params, req.years, dt=req.dt, seed=req.seed)
        series = ReturnSeries.from_path_set(paths)
        leverage = estimate_leverage(
            series,
            req.max_lag,
            params=params,
            block_len=req.block_len,
            n_boot=req.n_boot,
            seed=req.seed,
        )
        autocorr = estimate_autocorr(
            series,
            req.max_lag,
            params=params,
            block_len=req.block_len,
            n_boot=req.n_boot,
            seed=req.seed,
        )

    note = None
    try:
        lev_ref = leverage_analytic(params, leverage.lags)
    except UnsupportedModelError:
        lev_ref = None
        note = HESTON_LEVERAGE_NOTE
    ac_ref = autocorr_analytic(params, autocorr.lags)

    files = [
        _text_file("leverage.csv", dataio.curve_to_csv(leverage, lev_ref, note=note)),
        _text_file("autocorr.csv", dataio.curve_to_csv(autocorr, ac_ref)),
    ]
    manifest = dataio.build_manifest(
        command="correlations",
        params=params,
        settings={
            "years": req.years,
            "dt": req.dt,
            "max_lag": req.max_lag,
            "n_boot": req.n_boot,
            "block_len": req.block_len,
        },
        seed=req.seed,
        input_digests=_request_digest(req) | (extra_inputs or {}),
        output_files=[f.name for f in files],
    )
    return RunResponse(files=files, manifest=manifest, warnings=warns)


def run_fit(req: FitRequest, extra_inputs: dict[str, str] | None = None) -> RunResponse:
    prices = dataio.read_price_csv(req.csv_text, symbol=req.symbol)
    warns: list[str] = []
    files: list[FilePayload] = []
    results: list[dict] | None = None

    with _collect_warnings(warns):
        if req.what == "vol":
            fits = fit_volatility_all(prices)
            results = [f.to_dict() for f in fits]
            files.append(_text_file("fit_vol.json", dataio.fit_results_to_json(fits)))
        elif req.what == "ret":
            fits = fit_returns(prices)
            results = [f.to_dict() for f in fits]
            files.append(_text_file("fit_ret.json", dataio.fit_results_to_json(fits)))
        else:
            horizons = sorted(req.horizons)
            densities = multi_horizon_densities(prices, horizons)
            combined = ["horizon,x,density,shift"]
            for i, (h, dens) in enumerate(zip(horizons, densities)):
                files.append(
                    _text_file(
                        f"returns_h{h}.csv",
                        dataio.density_to_csv(dens, extra={"horizon": h}),
                    )
                )
                for x, p in zip(dens.grid, dens.density):
                    combined.append("%g,%.12g,%.12g,%d" % (h, x, p, i))
            files.append(_text_file("returns_horizons.csv", "\n".join(combined) + "\n"))

    digest = {"prices_csv": dataio.sha256_hex(req.csv_text)}
    manifest = dataio.build_manifest(
        command=f"fit:{req.what}",
        params=None,
        settings={"what": req.what, "horizons": list(req.horizons), "symbol": req.symbol},
        seed=0,
        input_digests=digest | _request_digest(req) | (extra_inputs or {}),
        output_files=[f.name for f in files],
    )
    return RunResponse(files=files, manifest=manifest, warnings=warns, results=results)
