"""Command-line front end: a thin client over the service operations.

Every subcommand builds the same request models the HTTP API accepts and
either executes them in-process (default) or posts them to a running
service (--server).  Outputs are written as plot-ready data files plus a
manifest that pins parameters, seed, tool version and input digests.

Exit codes: 0 success, 2 configuration/usage error, 3 numerical blow-up.
"""

from __future__ import annotations

import argparse
import base64
import dataclasses
import json
import sys
from pathlib import Path

from pydantic import ValidationError

from . import __version__, dataio
from .config import key_reference_text, parse_config
from .errors import (
    ConfigError,
    InsufficientDataError,
    InvalidParamsError,
    NonFiniteStateError,
    PriceCsvError,
    SvlabError,
)
from .service import ops
from .service.schemas import (
    FitRequest,
    RunResponse,
    correlations_request_from_config,
    pdf_request_from_config,
    simulate_request_from_config,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="svlab",
        description="Numerical laboratory for correlated stochastic volatility models.",
        epilog="Config key reference:\n\n" + key_reference_text(),
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=f"svlab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, needs_config: bool = True) -> None:
        if needs_config:
            p.add_argument("--config", required=True, help="run configuration file")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--server", default=None, help="base URL of a running service")

    p_sim = sub.add_parser("simulate", help="generate Monte Carlo paths")
    common(p_sim)
    p_sim.add_argument(
        "--format", choices=("csv", "binary"), default=None, help="path dump format"
    )

    p_pdf = sub.add_parser("pdf", help="Monte Carlo return densities per horizon")
    common(p_pdf)
    p_pdf.add_argument(
        "--horizons", default=None, help="comma-separated horizons in days"
    )

    p_corr = sub.add_parser(
        "correlations", help="leverage and volatility autocorrelation curves"
    )
    common(p_corr)

    p_fit = sub.add_parser("fit", help="maximum-likelihood fits of a price CSV")
    p_fit.add_argument("--prices", required=True, help="price CSV (Date,Close)")
    p_fit.add_argument(
        "--what", choices=("vol", "ret", "horizons"), default="vol",
        help="fit volatility families, return families, or horizon densities",
    )
    p_fit.add_argument("--horizons", default="1,5,20")
    p_fit.add_argument("--symbol", default="")
    p_fit.add_argument("--out", default=None)
    p_fit.add_argument("--server", default=None)

    p_serve = sub.add_parser("serve", help="run the HTTP service")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8000)

    return parser


def _parse_horizon_list(raw: str, cast=float) -> list:
    try:
        values = [cast(v) for v in raw.split(",") if v.strip()]
    except ValueError as exc:
        raise ConfigError(f"bad horizon list {raw!r}: {exc}") from None
    if not values:
        raise ConfigError("horizon list is empty")
    return values


def _load_config(args) -> tuple:
    path = Path(args.config)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    cfg = parse_config(text)
    if args.seed is not None:
        cfg = dataclasses.replace(cfg, seed=args.seed)
    digest = {f"config:{path.name}": dataio.sha256_hex(text)}
    return cfg, digest


def _post(server: str, endpoint: str, request) -> RunResponse:
    import httpx

    response = httpx.post(
        f"{server.rstrip('/')}/{endpoint}",
        content=request.model_dump_json(),
        headers={"content-type": "application/json"},
        timeout=600.0,
    )
    if response.status_code != 200:
        detail = response.json()
        kind = detail.get("kind", "config")
        message = detail.get("detail", response.text)
        if kind == "non-finite-state":
            raise NonFiniteStateError(-1, -1, message)
        raise ConfigError(f"server rejected request: {message}")
    return RunResponse.model_validate(response.json())


def _execute(args, endpoint: str, request, runner, extra_inputs: dict) -> RunResponse:
    if args.server:
        return _post(args.server, endpoint, request)
    return runner(request, extra_inputs)


def _write_outputs(response: RunResponse, out_dir: str | None) -> None:
    out = Path(out_dir or ".")
    out.mkdir(parents=True, exist_ok=True)
    for item in response.files:
        target = out / item.name
        if item.kind == "text":
            dataio.write_text(target, item.text or "")
        else:
            dataio.write_bytes(target, base64.b64decode(item.b64 or ""))
    dataio.write_text(
        out / "manifest.json", json.dumps(response.manifest, indent=2, sort_keys=True) + "\n"
    )
    for message in response.warnings:
        print(f"warning: {message}", file=sys.stderr)


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits with 2 on usage errors, matching our contract
        return int(exc.code or 0)

    try:
        if args.command == "serve":
            import uvicorn

            from .service.app import app

            uvicorn.run(app, host=args.host, port=args.port)
            return EXIT_OK

        if args.command == "simulate":
            cfg, digest = _load_config(args)
            if args.format:
                cfg = dataclasses.replace(cfg, format=args.format)
            request = simulate_request_from_config(cfg)
            response = _execute(args, "simulate", request, ops.run_simulate, digest)
            _write_outputs(response, args.out or cfg.directory)

        elif args.command == "pdf":
            cfg, digest = _load_config(args)
            horizons = (
                _parse_horizon_list(args.horizons) if args.horizons is not None else None
            )
            request = pdf_request_from_config(cfg, horizons)
            response = _execute(args, "pdf", request, ops.run_pdf, digest)
            _write_outputs(response, args.out or cfg.directory)

        elif args.command == "correlations":
            cfg, digest = _load_config(args)
            request = correlations_request_from_config(cfg)
            response = _execute(args, "correlations", request, ops.run_correlations, digest)
            _write_outputs(response, args.out or cfg.directory)

        elif args.command == "fit":
            prices_path = Path(args.prices)
            try:
                csv_text = prices_path.read_text()
            except OSError as exc:
                raise ConfigError(f"cannot read prices {prices_path}: {exc}") from None
            request = FitRequest(
                csv_text=csv_text,
                what=args.what,
                horizons=_parse_horizon_list(args.horizons, cast=int),
                symbol=args.symbol or prices_path.stem,
            )
            digest = {f"prices:{prices_path.name}": dataio.sha256_hex(csv_text)}
            response = _execute(args, "fit", request, ops.run_fit, digest)
            _write_outputs(response, args.out)

        else:  # pragma: no cover - argparse enforces the choices
            parser.error(f"unknown command {args.command}")

    except NonFiniteStateError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (
        ConfigError,
        PriceCsvError,
        InvalidParamsError,
        InsufficientDataError,
        ValidationError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SvlabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
