import json
from pathlib import Path

import pytest

from eprlab.cli import main, oracle_check_rows
from eprlab.config import ConfigError, RunConfig, parse_config

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def test_empty_config_is_defaults():
    cfg = parse_config("")
    assert cfg.as_dict() == RunConfig().as_dict()


def test_partial_sections_merge():
    cfg = parse_config('{"grid": {"n": 2048}, "protocol": {"slit_low": {"width": 0.2}}}')
    assert cfg.grid == {"n": 2048, "x_min": -40.0, "x_max": 40.0}
    assert cfg.slit_low.width == 0.2
    assert cfg.slit_low.kind == "tophat"


@pytest.mark.parametrize(
    "doc, key",
    [
        ('{"grid": {"n": 1000}}', "grid.n"),
        ('{"state": {"sigma_plus": -1}}', "state.sigma_plus"),
        ('{"grid": {"nn": 4}}', "grid.nn"),
        ('{"bogus": 1}', "bogus"),
        ('{"seed": -3}', "seed"),
        ('{"times": {"delays": [1.0, 0.5]}}', "times.delays"),
        ('{"protocol": {"model": "m3"}}', "protocol.model"),
        ('{"protocol": {"slit_low": {"width": 0.8}}}', "protocol.slit_low"),
        ('{"aperture": {"kind": "round"}}', "aperture.kind"),
        ('{"grid": {"n": "big"}}', "grid.n"),
    ],
)
def test_invalid_values_name_the_key(doc, key):
    with pytest.raises(ConfigError, match=key.replace(".", r"\.")):
        parse_config(doc)


def test_malformed_json():
    with pytest.raises(ConfigError, match="malformed"):
        parse_config("{not json")


@pytest.mark.parametrize("name", sorted(p.name for p in CONFIGS.glob("*.json")))
def test_shipped_configs_parse(name):
    parse_config((CONFIGS / name).read_text())


def test_cli_error_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"grid": {"n": 7}}')
    assert main(["state", "--config", str(bad), "--out", str(tmp_path / "o")]) == 2
    assert "grid.n" in capsys.readouterr().err


def test_bell_report(tmp_path):
    assert main(["bell", "--out", str(tmp_path)]) == 0
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["results"]["lhv_max_chsh"] == 2
    assert set(report) == {"subcommand", "version", "seed", "config", "results", "files", "timestamp"}
    assert (tmp_path / "chsh.csv").exists()


def test_state_writes_csv(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"state": {"kind": "discrete", "n_terms": 3}, "protocol": {"trials": 3000}}))
    assert main(["state", "--config", str(cfg), "--out", str(tmp_path), "--seed", "9"]) == 0
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["seed"] == 9
    assert sum(report["results"]["reduction_frequencies"]) == pytest.approx(1.0)
    lines = (tmp_path / "state_marginal_x1.csv").read_text().splitlines()
    assert len(lines) == 1025


def test_oracle_check_passes_on_aligned_grid():
    cfg = parse_config((CONFIGS / "canonical.json").read_text())
    rows = oracle_check_rows(cfg)
    assert all(r["pass"] for r in rows), [r for r in rows if not r["pass"]]


def test_oracle_check_flags_misaligned_slit():
    # a 1-wide slit on dx = 0.078125 keeps 12 cells, i.e. an effective width of 0.9375
    rows = {r["quantity"]: r for r in oracle_check_rows(parse_config(""))}
    assert not rows["detection_probability"]["pass"]
    assert rows["no_signaling_l1"]["pass"]
