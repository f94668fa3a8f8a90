import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from svlab import ModelParams
from svlab.dataio import price_series_to_csv

from conftest import synthetic_prices

CONFIG_SMALL = """
[model]
kind = vasicek
alpha = 0.05
m = 0.2
k = 0.02
rho = -0.4

[simulation]
dt = 1.0
n_steps = 10
n_paths = 1
seed = 7
"""


def run_cli(args, cwd, env_extra=None):
    import os

    env = os.environ.copy()
    env.update(env_extra or {})
    return subprocess.run(
        [sys.executable, "-m", "svlab", *args],
        capture_output=True,
        text=True,
        cwd=cwd,
        env=env,
    )


@pytest.fixture()
def cfg_file(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text(CONFIG_SMALL)
    return cfg


def test_simulate_minimal_run(tmp_path, cfg_file):
    out = tmp_path / "out"
    r = run_cli(["simulate", "--config", str(cfg_file), "--out", str(out)], tmp_path)
    assert r.returncode == 0, r.stderr
    lines = (out / "paths.csv").read_text().splitlines()
    assert len(lines) == 1 + 11  # header + initial state + 10 steps
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["command"] == "simulate"
    assert manifest["seed"] == 7
    assert any(k.startswith("config:") for k in manifest["inputs"])


def test_simulate_byte_identical_reruns(tmp_path, cfg_file):
    out1, out2 = tmp_path / "a", tmp_path / "b"
    assert run_cli(["simulate", "--config", str(cfg_file), "--out", str(out1)], tmp_path).returncode == 0
    assert run_cli(["simulate", "--config", str(cfg_file), "--out", str(out2)], tmp_path).returncode == 0
    assert (out1 / "paths.csv").read_bytes() == (out2 / "paths.csv").read_bytes()
    assert (out1 / "manifest.json").read_bytes() == (out2 / "manifest.json").read_bytes()


def test_simulate_worker_count_independent(tmp_path):
    cfg = tmp_path / "many.cfg"
    cfg.write_text(CONFIG_SMALL.replace("n_paths = 1", "n_paths = 2500"))
    out1, out4 = tmp_path / "w1", tmp_path / "w4"
    r1 = run_cli(["simulate", "--config", str(cfg), "--out", str(out1)], tmp_path,
                 env_extra={"SVLAB_THREADS": "1"})
    r4 = run_cli(["simulate", "--config", str(cfg), "--out", str(out4)], tmp_path,
                 env_extra={"SVLAB_THREADS": "4"})
    assert r1.returncode == 0 and r4.returncode == 0
    assert (out1 / "paths.csv").read_bytes() == (out4 / "paths.csv").read_bytes()


def test_simulate_seed_override_changes_output(tmp_path, cfg_file):
    out1, out2 = tmp_path / "s1", tmp_path / "s2"
    run_cli(["simulate", "--config", str(cfg_file), "--out", str(out1)], tmp_path)
    run_cli(["simulate", "--config", str(cfg_file), "--out", str(out2), "--seed", "8"], tmp_path)
    assert (out1 / "paths.csv").read_bytes() != (out2 / "paths.csv").read_bytes()
    assert json.loads((out2 / "manifest.json").read_text())["seed"] == 8


def test_simulate_binary_format_flag(tmp_path, cfg_file):
    out = tmp_path / "bin"
    r = run_cli(
        ["simulate", "--config", str(cfg_file), "--out", str(out), "--format", "binary"],
        tmp_path,
    )
    assert r.returncode == 0
    blob = (out / "paths.bin").read_bytes()
    assert blob[:8] == b"SVLBPATH"


def test_soft_dt_warning_run_proceeds(tmp_path):
    cfg = tmp_path / "coarse.cfg"
    cfg.write_text(CONFIG_SMALL.replace("alpha = 0.05", "alpha = 0.5"))
    out = tmp_path / "warn"
    r = run_cli(["simulate", "--config", str(cfg), "--out", str(out)], tmp_path)
    assert r.returncode == 0
    assert "warning" in r.stderr.lower()
    assert (out / "paths.csv").exists()


def test_config_error_exit_2(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text(CONFIG_SMALL.replace("alpha = 0.05", "alpha = -1"))
    r = run_cli(["simulate", "--config", str(cfg), "--out", str(tmp_path / "x")], tmp_path)
    assert r.returncode == 2
    assert "alpha" in r.stderr


def test_numerical_blowup_exit_3(tmp_path):
    cfg = tmp_path / "blow.cfg"
    cfg.write_text(
        "[model]\nkind = expou\nalpha = 1.0\nk = 10.0\n"
        "[simulation]\ndt = 1000\nn_steps = 60\nseed = 1\n"
    )
    r = run_cli(["simulate", "--config", str(cfg), "--out", str(tmp_path / "x")], tmp_path)
    assert r.returncode == 3
    assert "non-finite" in r.stderr


def test_pdf_empty_horizons_usage_error(tmp_path, cfg_file):
    r = run_cli(
        ["pdf", "--config", str(cfg_file), "--horizons", ",", "--out", str(tmp_path / "x")],
        tmp_path,
    )
    assert r.returncode == 2


def test_pdf_writes_per_horizon_files(tmp_path, cfg_file):
    out = tmp_path / "pdf"
    r = run_cli(
        [
            "pdf", "--config", str(cfg_file), "--horizons", "1,5",
            "--out", str(out),
        ],
        tmp_path,
    )
    assert r.returncode == 0, r.stderr
    assert (out / "pdf_h1.csv").exists() and (out / "pdf_h5.csv").exists()
    summary = (out / "pdf_summary.csv").read_text().splitlines()
    assert summary[0] == "horizon,n_samples,variance,excess_kurtosis"


def test_correlations_low_statistics_warns_but_runs(tmp_path):
    cfg = tmp_path / "corr.cfg"
    cfg.write_text(CONFIG_SMALL + "\n[estimators]\nyears = 1\nn_boot = 20\n")
    out = tmp_path / "corr"
    r = run_cli(["correlations", "--config", str(cfg), "--out", str(out)], tmp_path)
    assert r.returncode == 0, r.stderr
    assert "warning" in r.stderr.lower()
    lev = (out / "leverage.csv").read_text().splitlines()
    assert lev[0] == "lag,value,stderr,analytic"
    assert (out / "autocorr.csv").exists()


def test_fit_vol_and_ret(tmp_path):
    p = ModelParams(kind="expou", alpha=0.1, m=0.0, k=np.sqrt(0.2), rho=-0.5)
    csv_path = tmp_path / "prices.csv"
    csv_path.write_text(price_series_to_csv(synthetic_prices(p, 10_000, seed=10)))
    out = tmp_path / "fit"
    r = run_cli(["fit", "--prices", str(csv_path), "--what", "vol", "--out", str(out)], tmp_path)
    assert r.returncode == 0, r.stderr
    ranking = json.loads((out / "fit_vol.json").read_text())
    assert {f["family"] for f in ranking} == {"normal", "gamma", "lognormal"}
    assert ranking[0]["family"] == "lognormal"  # ranking sorted by loglik
    assert ranking[0]["loglik"] >= ranking[1]["loglik"] >= ranking[2]["loglik"]
    r2 = run_cli(["fit", "--prices", str(csv_path), "--what", "ret", "--out", str(out)], tmp_path)
    assert r2.returncode == 0
    rets = json.loads((out / "fit_ret.json").read_text())
    assert {f["family"] for f in rets} == {"normal", "student_t"}
    assert rets[0]["family"] == "student_t"


def test_fit_horizons_outputs(tmp_path):
    p = ModelParams(kind="expou", alpha=0.1, m=0.0, k=np.sqrt(0.2), rho=-0.5)
    csv_path = tmp_path / "prices.csv"
    csv_path.write_text(price_series_to_csv(synthetic_prices(p, 3000, seed=11)))
    out = tmp_path / "hz"
    r = run_cli(
        ["fit", "--prices", str(csv_path), "--what", "horizons", "--horizons", "1,5,20",
         "--out", str(out)],
        tmp_path,
    )
    assert r.returncode == 0, r.stderr
    combined = (out / "returns_horizons.csv").read_text().splitlines()
    assert combined[0] == "horizon,x,density,shift"
    assert {row.split(",")[-1] for row in combined[1:]} == {"0", "1", "2"}


def test_fit_bad_close_exit_2_with_row(tmp_path):
    csv_path = tmp_path / "bad.csv"
    csv_path.write_text("Date,Close\n2020-01-01,100\n2020-01-02,-1\n")
    r = run_cli(["fit", "--prices", str(csv_path), "--what", "vol"], tmp_path)
    assert r.returncode == 2
    assert "row 3" in r.stderr


def test_missing_config_exit_2(tmp_path):
    r = run_cli(["simulate", "--config", str(tmp_path / "nope.cfg")], tmp_path)
    assert r.returncode == 2


def test_usage_error_exit_2(tmp_path):
    r = run_cli(["simulate"], tmp_path)  # --config required
    assert r.returncode == 2


def test_server_mode_thin_client(tmp_path, cfg_file, monkeypatch):
    """--server routes the same request models through HTTP."""
    import httpx
    from fastapi.testclient import TestClient

    from svlab.cli import main
    from svlab.service.app import app

    test_client = TestClient(app)

    def fake_post(url, content=None, headers=None, timeout=None):
        endpoint = url.rsplit("/", 1)[-1]
        return test_client.post(f"/{endpoint}", content=content, headers=headers)

    monkeypatch.setattr(httpx, "post", fake_post)
    out = tmp_path / "via_http"
    code = main(
        ["simulate", "--config", str(cfg_file), "--out", str(out),
         "--server", "http://svlab.test"]
    )
    assert code == 0
    via_http = (out / "paths.csv").read_bytes()

    out2 = tmp_path / "in_proc"
    assert main(["simulate", "--config", str(cfg_file), "--out", str(out2)]) == 0
    assert via_http == (out2 / "paths.csv").read_bytes()
