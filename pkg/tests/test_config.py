import pytest

from svlab import ConfigError, ModelKind
from svlab.config import key_reference_text, parse_config

MINIMAL = """
[model]
kind = expou
alpha = 0.1
k = 0.22

[simulation]
dt = 1.0
n_steps = 252
"""


def test_minimal_config_parses_with_defaults():
    cfg = parse_config(MINIMAL)
    assert cfg.params.kind is ModelKind.EXP_OU
    assert cfg.params.m == 0.0
    assert cfg.params.y0 == 0.0
    assert cfg.dt == 1.0
    assert cfg.n_steps == 252
    assert cfg.n_paths == 1
    assert cfg.seed == 0
    assert cfg.max_lag == 40
    assert cfg.years == 100
    assert cfg.horizons == (1, 5, 20)
    assert cfg.format == "csv"


def test_full_config_round_trip():
    text = MINIMAL + """
[estimators]
max_lag = 25
years = 10
horizons = 1, 5, 20, 250
pdf_paths = 5000

[output]
directory = out
format = binary
"""
    cfg = parse_config(text)
    assert cfg.max_lag == 25
    assert cfg.years == 10
    assert cfg.horizons == (1, 5, 20, 250)
    assert cfg.pdf_paths == 5000
    assert cfg.directory == "out"
    assert cfg.format == "binary"


def test_vasicek_defaults():
    cfg = parse_config(
        "[model]\nkind = vasicek\nalpha = 0.1\nk = 0.02\n[simulation]\ndt = 1\nn_steps = 10\n"
    )
    assert cfg.params.m == 0.2
    assert cfg.params.y0 == 0.2  # defaults to the reversion level


def test_unknown_key_rejected():
    with pytest.raises(ConfigError, match="model.alpho"):
        parse_config(MINIMAL.replace("alpha", "alpho"))


def test_unknown_section_rejected():
    with pytest.raises(ConfigError, match="mdoel"):
        parse_config(MINIMAL.replace("[model]", "[mdoel]"))


def test_missing_required_key():
    with pytest.raises(ConfigError, match="model.k"):
        parse_config(MINIMAL.replace("k = 0.22", ""))


def test_bad_value_names_field():
    with pytest.raises(ConfigError, match="simulation.dt"):
        parse_config(MINIMAL.replace("dt = 1.0", "dt = fast"))


def test_invalid_model_params_surface_as_config_error():
    with pytest.raises(ConfigError, match="alpha"):
        parse_config(MINIMAL.replace("alpha = 0.1", "alpha = -1"))


def test_syntax_error_carries_line_info():
    broken = "[model\nkind = expou\n"
    with pytest.raises(ConfigError, match="line"):
        parse_config(broken)


def test_empty_horizon_list_rejected():
    with pytest.raises(ConfigError, match="horizons"):
        parse_config(MINIMAL + "[estimators]\nhorizons = ,\n")


def test_bad_format_rejected():
    with pytest.raises(ConfigError, match="format"):
        parse_config(MINIMAL + "[output]\nformat = parquet\n")


def test_key_reference_covers_all_sections():
    text = key_reference_text()
    for section in ("[model]", "[simulation]", "[estimators]", "[output]"):
        assert section in text
