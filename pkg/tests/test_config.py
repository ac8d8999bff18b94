import pytest

from gaugeelastic.config import (ConfigError, default_config, parse_config, parse_config_text,
                                 schema_reference)

SIM = """\
simulate:
  variant: wfe
  grid: {dim: 1, n: 64, n_steps: 10}
  material: {C: "1 + 0.2*sin(x)", rho: 1}
  prestate: {u0: ["0.05*sin(x)"]}
"""


@pytest.mark.parametrize("mode", ["simulate", "homogenize", "verify"])
def test_defaults_validate(mode):
    cfg = default_config(mode)
    assert cfg.mode == mode
    assert len(cfg.digest()) == 64


def test_typo_gets_suggestion_with_line():
    with pytest.raises(ConfigError) as exc:
        parse_config_text("simulate:\n  solver:\n    clf: 0.4\n")
    path, line, msg = exc.value.errors[0]
    assert path == "simulate.solver.clf"
    assert line == 3
    assert "did you mean 'cfl'" in msg


def test_unknown_mode_suggestion():
    with pytest.raises(ConfigError, match="did you mean 'simulate'"):
        parse_config_text("simulat: {}\n")


def test_missing_required_key():
    with pytest.raises(ConfigError, match="laminate"):
        parse_config_text("homogenize: {}\n")


def test_wfe_needs_u0():
    with pytest.raises(ConfigError, match="wfe variant needs u0"):
        parse_config_text("simulate:\n  variant: wfe\n")


def test_fraction_sum_is_checked():
    text = ("homogenize:\n  laminate:\n    phases:\n      - {C: 1, rho: 1, fraction: 0.5}\n"
            "      - {C: 2, rho: 1, fraction: 0.4}\n")
    with pytest.raises(ConfigError, match="fractions sum"):
        parse_config_text(text)


def test_wrong_mode_for_command():
    with pytest.raises(ConfigError, match="'homogenize' command"):
        parse_config_text(SIM, expect_mode="homogenize")


def test_canonical_round_trip(tmp_path):
    cfg = parse_config_text(SIM)
    again = parse_config_text(cfg.canonical())
    assert again.canonical() == cfg.canonical()
    assert again.digest() == cfg.digest()
    p = tmp_path / "c.yaml"
    p.write_text(cfg.canonical())
    assert parse_config(str(p)).digest() == cfg.digest()


def test_defaults_are_not_shared():
    a = default_config("simulate")
    a["solver"]["monitors"].append("conservation_spatial")
    assert "conservation_spatial" not in default_config("simulate")["solver"]["monitors"]


def test_unreadable_file_and_bad_yaml(tmp_path):
    with pytest.raises(ConfigError, match="cannot read"):
        parse_config(str(tmp_path / "none.yaml"))
    with pytest.raises(ConfigError, match="YAML syntax"):
        parse_config_text("simulate: [\n")


def test_schema_reference_lists_keys():
    rows = schema_reference()
    assert any(r.startswith("simulate.solver.cfl") for r in rows)
    assert any(r.startswith("homogenize.sweep.n_harmonics") for r in rows)
