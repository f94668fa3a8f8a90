"""File formats: path dumps, curve/density CSVs, price ingestion, manifests.

Path CSVs use shortest round-trip float formatting (lossless at double
precision); analysis CSVs (curves, densities) use 12 significant digits.
The binary path dump is a magic-tagged container that reconstructs the full
PathSet including parameters and configuration.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import struct
from dataclasses import asdict
from datetime import date
from pathlib import Path

import numpy as np

from . import __version__
from .calibrate import FitResult, PriceSeries
from .errors import InvalidParamsError, PriceCsvError
from .estimators import CorrelationCurve, EmpiricalDensity
from .models import ModelKind, ModelParams
from .simulate import PathConfig, PathSet

PATHS_MAGIC = b"SVLBPATH"
PATHS_VERSION = 1

ANALYSIS_FMT = "%.12g"


def _fmt(value: float) -> str:
    return repr(float(value))


# ---------------------------------------------------------------------------
# PathSet: columnar CSV


def paths_to_csv(paths: PathSet) -> str:
    """Serialize a PathSet to columnar CSV (path_id, step, t, x, y, sigma)."""
    sigma = paths.sigma()
    steps = paths.config.recorded_steps()
    buf = io.StringIO()
    buf.write("path_id,step,t,x,y,sigma\n")
    for i in range(paths.n_paths):
        for j, step in enumerate(steps):
            buf.write(
                f"{i},{step},{_fmt(paths.times[j])},{_fmt(paths.x[i, j])},"
                f"{_fmt(paths.y[i, j])},{_fmt(sigma[i, j])}\n"
            )
    return buf.getvalue()


def paths_from_csv(text: str) -> dict[str, np.ndarray]:
    """Parse a path CSV back into column arrays keyed by header name."""
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header != ["path_id", "step", "t", "x", "y", "sigma"]:
        raise InvalidParamsError(f"unexpected path CSV header: {header}")
    cols: dict[str, list[float]] = {name: [] for name in header}
    for row in reader:
        if not row:
            continue
        for name, value in zip(header, row):
            cols[name].append(float(value))
    out = {name: np.asarray(values) for name, values in cols.items()}
    out["path_id"] = out["path_id"].astype(int)
    out["step"] = out["step"].astype(int)
    return out


# ---------------------------------------------------------------------------
# PathSet: binary dump


def paths_to_binary(paths: PathSet) -> bytes:
    header = {
        "params": {**asdict(paths.params), "kind": paths.params.kind.value},
        "config": asdict(paths.config),
        "n_paths": paths.n_paths,
        "n_recorded": paths.n_recorded,
    }
    header_bytes = json.dumps(header, sort_keys=True).encode()
    blob = bytearray()
    blob += PATHS_MAGIC
    blob += struct.pack("<I", PATHS_VERSION)
    blob += struct.pack("<I", len(header_bytes))
    blob += header_bytes
    for arr in (paths.times, paths.x, paths.y, paths.integrated_var):
        blob += np.ascontiguousarray(arr, dtype="<f8").tobytes()
    return bytes(blob)


def paths_from_binary(blob: bytes) -> PathSet:
    if blob[:8] != PATHS_MAGIC:
        raise InvalidParamsError("not a path dump: bad magic")
    (version,) = struct.unpack_from("<I", blob, 8)
    if version != PATHS_VERSION:
        raise InvalidParamsError(f"unsupported path dump version {version}")
    (header_len,) = struct.unpack_from("<I", blob, 12)
    header = json.loads(blob[16 : 16 + header_len].decode())
    params = ModelParams(**{**header["params"], "kind": ModelKind(header["params"]["kind"])})
    config = PathConfig(**header["config"])
    n_paths, n_rec = header["n_paths"], header["n_recorded"]
    offset = 16 + header_len
    times = np.frombuffer(blob, dtype="<f8", count=n_rec, offset=offset).copy()
    offset += 8 * n_rec
    arrays = []
    for _ in range(3):
        arr = np.frombuffer(blob, dtype="<f8", count=n_paths * n_rec, offset=offset)
        arrays.append(arr.reshape(n_paths, n_rec).copy())
        offset += 8 * n_paths * n_rec
    return PathSet(
        config=config,
        params=params,
        times=times,
        x=arrays[0],
        y=arrays[1],
        integrated_var=arrays[2],
    )


# ---------------------------------------------------------------------------
# Curves and densities


def curve_to_csv(
    curve: CorrelationCurve,
    analytic: np.ndarray | None = None,
    note: str | None = None,
) -> str:
    """CSV with lag,value,stderr,analytic columns; analytic blank if absent."""
    buf = io.StringIO()
    if note:
        buf.write(f"# note: {note}\n")
    buf.write("lag,value,stderr,analytic\n")
    for i in range(len(curve.lags)):
        ref = "" if analytic is None else ANALYSIS_FMT % analytic[i]
        buf.write(
            f"{ANALYSIS_FMT % curve.lags[i]},{ANALYSIS_FMT % curve.values[i]},"
            f"{ANALYSIS_FMT % curve.stderr[i]},{ref}\n"
        )
    return buf.getvalue()


def curve_from_csv(text: str) -> tuple[CorrelationCurve, np.ndarray | None]:
    rows = [
        line for line in text.splitlines() if line.strip() and not line.startswith("#")
    ]
    header = rows[0].split(",")
    if header != ["lag", "value", "stderr", "analytic"]:
        raise InvalidParamsError(f"unexpected curve CSV header: {header}")
    lags, values, stderr, analytic = [], [], [], []
    has_analytic = True
    for row in rows[1:]:
        parts = row.split(",")
        lags.append(float(parts[0]))
        values.append(float(parts[1]))
        stderr.append(float(parts[2]))
        if len(parts) < 4 or parts[3] == "":
            has_analytic = False
        else:
            analytic.append(float(parts[3]))
    curve = CorrelationCurve(
        lags=np.array(lags), values=np.array(values), stderr=np.array(stderr)
    )
    return curve, (np.array(analytic) if has_analytic else None)


def density_to_csv(density: EmpiricalDensity, extra: dict | None = None) -> str:
    buf = io.StringIO()
    meta = {
        "n_samples": density.n_samples,
        "binwidth": density.binwidth,
        "n_effective": density.n_effective,
        "clip_mass": density.clip_mass,
    }
    if extra:
        meta.update(extra)
    buf.write(f"# meta: {json.dumps(meta, sort_keys=True)}\n")
    buf.write("x,density\n")
    for i in range(len(density.grid)):
        buf.write(f"{ANALYSIS_FMT % density.grid[i]},{ANALYSIS_FMT % density.density[i]}\n")
    return buf.getvalue()


def table_from_csv(text: str) -> dict[str, np.ndarray]:
    """Generic reader for simple header+rows CSVs (summary/combined files)."""
    rows = [
        line for line in text.splitlines() if line.strip() and not line.startswith("#")
    ]
    if not rows:
        raise InvalidParamsError("empty CSV table")
    header = rows[0].split(",")
    cols: dict[str, list[float]] = {name: [] for name in header}
    for row in rows[1:]:
        for name, value in zip(header, row.split(",")):
            cols[name].append(float(value))
    return {name: np.asarray(values) for name, values in cols.items()}


def density_from_csv(text: str) -> EmpiricalDensity:
    meta: dict = {}
    rows = []
    for line in text.splitlines():
        if line.startswith("# meta: "):
            meta = json.loads(line[len("# meta: ") :])
        elif line.strip() and not line.startswith("#"):
            rows.append(line)
    if rows[0].split(",") != ["x", "density"]:
        raise InvalidParamsError(f"unexpected density CSV header: {rows[0]}")
    grid, dens = [], []
    for row in rows[1:]:
        a, b = row.split(",")
        grid.append(float(a))
        dens.append(float(b))
    return EmpiricalDensity(
        grid=np.array(grid),
        density=np.array(dens),
        n_samples=int(meta.get("n_samples", 0)),
        binwidth=float(meta.get("binwidth", 0.0) or np.diff(grid).mean()),
        n_effective=meta.get("n_effective"),
        clip_mass=float(meta.get("clip_mass", 0.0)),
    )


# ---------------------------------------------------------------------------
# Price CSV ingestion


def read_price_csv(text: str, symbol: str = "") -> PriceSeries:
    """Parse a Date/Close CSV into a PriceSeries.

    The header row is required; Date must be ISO-8601 and Close a positive
    decimal.  Open/High/Low/Volume and other columns are ignored.  Rows may
    arrive in any order; the series is sorted ascending by date.
    Failures carry the 1-based row number.
    """
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise PriceCsvError("empty price CSV") from None
    names = [h.strip().lower() for h in header]
    if "date" not in names or "close" not in names:
        raise PriceCsvError(f"header must contain Date and Close columns, got {header}")
    i_date, i_close = names.index("date"), names.index("close")

    entries: list[tuple[date, float]] = []
    for row_num, row in enumerate(reader, start=2):
        if not row or all(not cell.strip() for cell in row):
            continue
        try:
            d = date.fromisoformat(row[i_date].strip())
        except (ValueError, IndexError):
            raise PriceCsvError(
                f"row {row_num}: bad Date field {row[i_date] if len(row) > i_date else ''!r}"
            ) from None
        try:
            close = float(row[i_close])
        except (ValueError, IndexError):
            raise PriceCsvError(f"row {row_num}: bad Close field") from None
        if not close > 0:
            raise PriceCsvError(f"row {row_num}: non-positive close {close}")
        entries.append((d, close))

    if len(entries) < 2:
        raise PriceCsvError("price CSV needs at least 2 data rows")
    entries.sort(key=lambda e: e[0])
    for (d1, _), (d2, _) in zip(entries, entries[1:]):
        if d1 == d2:
            raise PriceCsvError(f"duplicate date {d1}")
    return PriceSeries(
        dates=tuple(e[0] for e in entries),
        closes=np.array([e[1] for e in entries]),
        symbol=symbol,
    )


def price_series_to_csv(prices: PriceSeries) -> str:
    buf = io.StringIO()
    buf.write("Date,Close\n")
    for d, c in zip(prices.dates, prices.closes):
        buf.write(f"{d.isoformat()},{_fmt(c)}\n")
    return buf.getvalue()


# ---------------------------------------------------------------------------
# Fit results and manifests


def fit_results_to_json(results: list[FitResult]) -> str:
    return json.dumps([r.to_dict() for r in results], indent=2, sort_keys=True)


def sha256_hex(data: bytes | str) -> str:
    if isinstance(data, str):
        data = data.encode()
    return hashlib.sha256(data).hexdigest()


def build_manifest(
    command: str,
    params: ModelParams | None,
    settings: dict,
    seed: int,
    input_digests: dict[str, str],
    output_files: list[str],
) -> dict:
    """Reproducibility record: everything needed to re-run bit-exactly.

    Deliberately excludes wall-clock time so repeated runs emit identical
    manifests.
    """
    manifest = {
        "tool": "svlab",
        "version": __version__,
        "command": command,
        "seed": seed,
        "settings": settings,
        "inputs": input_digests,
        "outputs": sorted(output_files),
    }
    if params is not None:
        manifest["model"] = {**asdict(params), "kind": params.kind.value}
    return manifest


def write_text(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


def write_bytes(path: Path, blob: bytes) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(blob)
