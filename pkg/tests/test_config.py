import pytest

from beamlab.config import (
    BeamGeometry,
    ConfigError,
    DEFAULT_CONFIG_TEXT,
    default_config,
    parse_config,
    serialize_config,
)


def test_default_round_trip():
    cfg = default_config()
    assert parse_config(serialize_config(cfg)) == cfg


def test_identity_round_trip_example():
    text = DEFAULT_CONFIG_TEXT
    cfg = parse_config(text)
    assert cfg.geometry.ell0 == 0.5
    assert cfg.geometry.ell == 1.0
    assert cfg.n_left == cfg.n_right == 48
    assert parse_config(serialize_config(cfg)) == cfg


def test_round_trip_survives_field_changes():
    base = default_config()
    for updates in (
        {"ell0": 0.25, "ell": 2.0},
        {"n_left": 96, "n_right": 16},
        {"lambda_min": 1.5, "lambda_max": 7.5e5, "n_lambda": 11},
        {"seed": 123456789, "dt": 2.5e-4, "t_final": 3.0},
    ):
        cfg = base.replace(**updates)
        assert parse_config(serialize_config(cfg)) == cfg


def test_interface_outside_beam():
    with pytest.raises(ConfigError, match="interface outside beam"):
        BeamGeometry(ell0=1.2, ell=1.0)
    with pytest.raises(ConfigError, match="interface outside beam"):
        parse_config(DEFAULT_CONFIG_TEXT.replace("ell0 = 0.5", "ell0 = 1.2"))


def test_missing_key_named():
    text = "\n".join(
        line for line in DEFAULT_CONFIG_TEXT.splitlines() if not line.startswith("dt")
    )
    with pytest.raises(ConfigError, match="dt"):
        parse_config(text)


def test_unknown_and_duplicate_keys():
    with pytest.raises(ConfigError, match="unknown key"):
        parse_config(DEFAULT_CONFIG_TEXT + "bogus = 1\n")
    with pytest.raises(ConfigError, match="duplicate key"):
        parse_config(DEFAULT_CONFIG_TEXT + "dt = 0.002\n")


def test_malformed_lines():
    with pytest.raises(ConfigError, match="expected 'key = value'"):
        parse_config(DEFAULT_CONFIG_TEXT + "just words\n")
    with pytest.raises(ConfigError, match="cannot parse"):
        parse_config(DEFAULT_CONFIG_TEXT.replace("dt = 0.001", "dt = tiny"))


@pytest.mark.parametrize(
    "updates,fragment",
    [
        ({"n_left": 4}, ">= 8"),
        ({"lambda_min": 5.0, "lambda_max": 2.0}, "lambda_min < lambda_max"),
        ({"n_lambda": 3}, "n_lambda"),
        ({"dt": 30.0}, "dt < t_final"),
        ({"oracle_tol": -1.0}, "nonnegative"),
    ],
)
def test_invariant_violations(updates, fragment):
    with pytest.raises(ConfigError, match=fragment):
        default_config().replace(**updates)


def test_comments_and_blanks_ignored():
    text = "# leading comment\n\n" + DEFAULT_CONFIG_TEXT + "\n# trailing\n"
    assert parse_config(text) == default_config()
