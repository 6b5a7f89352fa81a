"""Command-line interface: output schema, formats, and exit codes."""

import json

import numpy as np
import pytest

from surfmod import DegenerateJacobian, cli

FAST = ["--order", "6", "--subdivisions", "2"]

EXPECTED_KEYS = [
    "family",
    "parameters",
    "p",
    "q",
    "modulus",
    "expected_modulus",
    "relative_error",
    "l_samples",
    "diagnostics",
    "seed",
]


def run_compute(tmp_path, *extra):
    out = tmp_path / "result.json"
    code = cli.main(
        ["compute", "--family", "parallel", "--u", "0,2", "--v", "0,3"]
        + FAST
        + ["--output", str(out)]
        + list(extra)
    )
    return code, out


def test_compute_parallel_json(tmp_path):
    code, out = run_compute(tmp_path)
    assert code == 0
    data = json.loads(out.read_text())
    assert list(data.keys()) == EXPECTED_KEYS
    assert data["family"] == "parallel"
    assert data["p"] == 2 and data["q"] == 2
    assert data["modulus"] == pytest.approx(2.0 / 3.0, rel=1e-12)
    assert data["relative_error"] < 1e-12
    assert data["seed"] == 0
    assert len(data["l_samples"]) == 12
    for sample in data["l_samples"]:
        assert sample["l"] == pytest.approx(3.0, rel=1e-12)
    diag = data["diagnostics"]
    assert diag["node_count"] == 144
    assert diag["quadrature"]["order"] == 6


def test_json_round_trip_is_byte_identical(tmp_path):
    _, out = run_compute(tmp_path)
    text = out.read_text()
    reloaded = json.loads(text)
    assert cli._to_json(reloaded) + "\n" == text


def test_compute_csv(tmp_path):
    out = tmp_path / "result.csv"
    code = cli.main(
        ["compute", "--family", "parallel", "--u", "0,2", "--v", "0,3"]
        + FAST
        + ["--output", str(out), "--format", "csv"]
    )
    assert code == 0
    lines = out.read_text().splitlines()
    meta = [line for line in lines if line.startswith("#")]
    assert any(line.startswith("# family parallel") for line in meta)
    assert any(line.startswith("# modulus ") for line in meta)
    header = next(line for line in lines if not line.startswith("#"))
    assert header == "x0,l"
    rows = [line for line in lines if not line.startswith("#")][1:]
    assert len(rows) == 12
    for row in rows:
        x, l = (float(tok) for tok in row.split(","))
        assert 0.0 < x < 2.0
        assert l == pytest.approx(3.0, rel=1e-12)


def test_seed_recorded(tmp_path):
    _, out = run_compute(tmp_path, "--seed", "7")
    assert json.loads(out.read_text())["seed"] == 7


def test_verify_passes_for_annulus(capsys):
    code = cli.main(
        ["verify", "--family", "annulus-radial", "--r0", "1", "--r1", "2"]
        + FAST
        + ["--trials", "8"]
    )
    captured = capsys.readouterr().out
    assert code == 0
    for name in ("admissibility", "coarea", "route-equivalence", "extremality"):
        assert f"PASS {name}" in captured


def test_verify_skips_missing_submersion(capsys):
    code = cli.main(["verify", "--family", "condenser"] + FAST + ["--trials", "5"])
    captured = capsys.readouterr().out
    assert code == 0
    assert "SKIP coarea" in captured
    assert "SKIP route-equivalence" in captured
    assert "PASS admissibility" in captured


def test_cross_validate_within_band(tmp_path, capsys):
    out = tmp_path / "ladder.json"
    code = cli.main(
        [
            "cross-validate",
            "--family",
            "parallel",
            "--u",
            "0,1",
            "--v",
            "0,1",
            "--ladder",
            "16,64",
            "--output",
            str(out),
        ]
    )
    assert code == 0
    data = json.loads(out.read_text())
    assert [row["resolution"] for row in data["rows"]] == [16, 64]
    assert data["rows"][-1]["relative_gap"] <= 0.05
    assert "PASS final gap" in capsys.readouterr().out


def test_unknown_family_is_config_error():
    assert cli.main(["compute", "--family", "klein-bottle"]) == 2


def test_bad_exponent_is_config_error():
    assert cli.main(["compute", "--family", "parallel", "--p", "1.0"]) == 2


def test_malformed_box_is_config_error():
    assert cli.main(["compute", "--family", "parallel", "--u", "zero,two"]) == 2


def test_missing_family_is_config_error():
    assert cli.main(["compute"]) == 2


def test_no_command_is_config_error():
    assert cli.main([]) == 2


def test_help_exits_clean():
    assert cli.main(["--help"]) == 0


def test_numerical_failure_maps_to_exit_three(monkeypatch):
    def boom(*args, **kwargs):
        raise DegenerateJacobian("synthetic failure")

    monkeypatch.setattr(cli, "modulus_p", boom)
    assert cli.main(["compute", "--family", "parallel"] + FAST) == 3


def test_config_file_supplies_defaults(tmp_path):
    config = tmp_path / "run.json"
    config.write_text(
        json.dumps(
            {
                "command": "compute",
                "family": "parallel",
                "parameters": {"u": [[0.0, 2.0]], "v": [[0.0, 3.0]]},
                "p": 2.0,
                "order": 6,
                "subdivisions": 2,
            }
        )
    )
    out = tmp_path / "result.json"
    code = cli.main(["compute", "--config", str(config), "--output", str(out)])
    assert code == 0
    assert json.loads(out.read_text())["modulus"] == pytest.approx(2.0 / 3.0, rel=1e-12)


def test_flags_override_config_file(tmp_path):
    config = tmp_path / "run.json"
    config.write_text(json.dumps({"family": "parallel", "p": 2.0}))
    out = tmp_path / "result.json"
    code = cli.main(
        ["compute", "--config", str(config), "--p", "3.0"]
        + FAST
        + ["--output", str(out)]
    )
    assert code == 0
    data = json.loads(out.read_text())
    assert data["p"] == 3
    assert data["q"] == pytest.approx(1.5)


def test_config_command_mismatch(tmp_path):
    config = tmp_path / "run.json"
    config.write_text(json.dumps({"command": "verify", "family": "parallel"}))
    assert cli.main(["compute", "--config", str(config)]) == 2


def test_config_unknown_key(tmp_path):
    config = tmp_path / "run.json"
    config.write_text(json.dumps({"family": "parallel", "colour": "red"}))
    assert cli.main(["compute", "--config", str(config)]) == 2


def test_number_formatting_survives_parsing():
    values = [0.1, 2.0 / 3.0, 1e-300, 123456.789, np.pi, 1.0, -0.25]
    for value in values:
        assert float(cli._format_number(value)) == value
    assert cli._format_number(0.0) == "0"
    with pytest.raises(ValueError):
        cli._format_number(np.inf)
    with pytest.raises(ValueError):
        cli._format_number(np.nan)
