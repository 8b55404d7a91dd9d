import json
import math

import pytest

from catqed import cli
from catqed.errors import ConfigParseError, ConfigValidationError

QUICK = {
    "wigner": ["--n-re", "11", "--n-im", "9"],
    "cat-prepare": ["--shots", "50"],
    "parity-decay": ["--n-times", "5"],
    "spectroscopy": [],
    "qec": ["--shots", "200", "--delta-t", "0.05"],
    "oracle-check": [],
}


def run(tmp_path, scenario, *extra, name="out"):
    out = tmp_path / name
    code = cli.main([scenario, "--out", str(out), "--no-timestamp", *QUICK[scenario], *extra])
    return code, out


def test_minimal_wigner_config_fills_defaults():
    cfg = cli.parse_config('{"scenario": "wigner", "alpha": 2, "sign": 1}')
    assert cfg.scenario == "wigner"
    assert cfg["alpha"] == 2.0 and isinstance(cfg["alpha"], float)
    assert (cfg["n_re"], cfg["n_im"], cfg["re_min"], cfg["im_max"]) == (81, 81, -4.0, 4.0)
    assert cfg.fmt == "csv"
    assert cfg["seed"] == 0


def test_negative_kappa_names_the_key():
    with pytest.raises(ConfigValidationError) as info:
        cli.parse_config('{"scenario": "parity-decay", "kappa": -0.5}')
    assert info.value.key == "kappa"
    assert "kappa" in str(info.value)


def test_unknown_key_lists_accepted_keys():
    with pytest.raises(ConfigValidationError) as info:
        cli.parse_config('{"scenario": "wigner", "kerr": 0.1}')
    msg = str(info.value)
    assert "kerr" in msg
    for key in cli.accepted_keys("wigner"):
        assert key in msg


@pytest.mark.parametrize("text", ["{not json", "[1, 2]", '"wigner"'])
def test_malformed_documents(text):
    with pytest.raises(ConfigParseError):
        cli.parse_config(text, "wigner")


def test_type_and_scenario_errors():
    with pytest.raises(ConfigValidationError):
        cli.parse_config('{"scenario": "wigner", "alpha": "big"}')
    with pytest.raises(ConfigValidationError):
        cli.parse_config('{"scenario": "wigner", "sign": 0}')
    with pytest.raises(ConfigValidationError):
        cli.parse_config('{"scenario": "teleport"}')
    with pytest.raises(ConfigValidationError):
        cli.parse_config('{"scenario": "qec"}', "wigner")
    with pytest.raises(ConfigValidationError):
        cli.parse_config('{"scenario": "cat-prepare", "format": "csv"}')
    with pytest.raises(ConfigValidationError):
        cli.parse_config('{"scenario": "qec", "delta_t": 0.3, "t_final": 1.0}')
    with pytest.raises(ConfigValidationError):
        cli.parse_config('{"scenario": "wigner", "seed": -1}')


def test_exit_codes(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{oops")
    assert cli.main(["wigner", "--config", str(bad)]) == 5
    bad.write_text('{"kerr": 1}')
    assert cli.main(["wigner", "--config", str(bad)]) == 2
    code, _ = run(tmp_path, "wigner", "--dim", "10")
    assert code == 3
    code, _ = run(tmp_path, "qec", "--t-final", "3", "--delta-t", "0.5")
    assert code == 4
    assert cli.main(["parity-decay", "--kappa", "-1", "--out", str(tmp_path / "x")]) == 2
    err = capsys.readouterr().err
    assert "kappa" in err


@pytest.mark.parametrize("scenario", cli.SCENARIOS)
def test_every_scenario_is_byte_identical_on_rerun(tmp_path, scenario):
    code_a, a = run(tmp_path, scenario, name="a")
    code_b, b = run(tmp_path, scenario, name="b")
    assert code_a == code_b == 0
    assert a.read_bytes() == b.read_bytes()
    meta_a = json.loads(cli.sidecar_path(a).read_text())
    meta_b = json.loads(cli.sidecar_path(b).read_text())
    meta_a.pop("payload"), meta_b.pop("payload")
    assert meta_a == meta_b
    assert "timestamp" not in meta_a


def test_csv_headers(tmp_path):
    headers = {"wigner": "beta_re,beta_im,w", "parity-decay": "t,parity", "qec": "t,fid_monitored,fid_unmonitored"}
    for scenario, header in headers.items():
        code, out = run(tmp_path, scenario, name=scenario)
        assert code == 0
        assert out.read_text().splitlines()[0] == header


def test_wigner_sidecar_and_center_value(tmp_path):
    code, out = run(tmp_path, "wigner", "--alpha", "2.5", "--n-re", "81", "--n-im", "81")
    assert code == 0
    meta = json.loads(cli.sidecar_path(out).read_text())
    assert meta["grid"]["n_re"] == 81
    assert meta["dim"] >= 2
    assert {"recipe", "quadrature_norm", "provenance"} <= set(meta)
    assert meta["provenance"]["seed"] == 0
    rows = [line.split(",") for line in out.read_text().splitlines()[1:]]
    center = [float(w) for r, i, w in rows if float(r) == 0.0 and float(i) == 0.0]
    assert center and abs(center[0] - 2 / math.pi) < 1e-8


def test_timestamp_only_in_sidecar(tmp_path):
    out = tmp_path / "p.csv"
    assert cli.main(["parity-decay", "--out", str(out), "--n-times", "3"]) == 0
    assert "timestamp" in json.loads(cli.sidecar_path(out).read_text())
    assert "timestamp" not in out.read_text()


def test_flags_override_config(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"scenario": "parity-decay", "alpha": 1.0, "times": [0.0, 1.0]}))
    out = tmp_path / "p.json"
    assert cli.main(["parity-decay", "--config", str(cfg), "--alpha", "1.5", "--format", "json",
                     "--out", str(out), "--no-timestamp"]) == 0
    doc = json.loads(out.read_text())
    assert doc["provenance"]["config"]["alpha"] == 1.5
    assert doc["t"] == [0.0, 1.0]
    assert doc["parity"][0] == pytest.approx(-1.0, abs=1e-10)


def test_json_qec_report_has_slope_fit(tmp_path):
    code, out = run(tmp_path, "qec", "--format", "json")
    assert code == 0
    doc = json.loads(out.read_text())
    assert {"monitored_slope", "unmonitored_slope"} <= set(doc["slope_fit"])
    assert doc["n_shots"] == 200 and doc["seed"] == 0


def test_oracle_check_prints_each_invariant(tmp_path, capsys):
    code, out = run(tmp_path, "oracle-check")
    assert code == 0
    lines = [line for line in capsys.readouterr().out.splitlines() if line.startswith(("PASS", "FAIL"))]
    assert len(lines) == len(json.loads(out.read_text())["checks"]) >= 7
    assert all(line.startswith("PASS") for line in lines)


def test_cat_prepare_deterministic_report(tmp_path):
    code, out = run(tmp_path, "cat-prepare", "--method", "deterministic", "--alpha", "0.5")
    assert code == 0
    doc = json.loads(out.read_text())
    c = math.exp(-0.5)
    assert doc["joint_fidelity"] == pytest.approx((1 + c) * (2 - c) ** 2 / 4, abs=1e-10)


def test_help_lists_scenarios_and_keys(capsys):
    with pytest.raises(SystemExit):
        cli.main(["--help"])
    text = capsys.readouterr().out
    for scenario in cli.SCENARIOS:
        assert scenario in text
    with pytest.raises(SystemExit):
        cli.main(["qec", "--help"])
    text = capsys.readouterr().out
    for key in cli.accepted_keys("qec"):
        assert "--" + key.replace("_", "-") in text
    assert "default" in text
