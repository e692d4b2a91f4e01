import json
from pathlib import Path

import jsonschema
import pytest
from click.testing import CliRunner

from rabi_spectra import cli
from rabi_spectra.core import ConvergenceError
from rabi_spectra.output import read_csv

SCHEMA = json.loads((Path(__file__).parents[1] / "docs" / "config_schema.json").read_text())


def run(args, tmp_path):
    return cli.main(args + ["--out", str(tmp_path)])


def test_crossings_one_photon(tmp_path):
    assert run(["crossings", "--delta", "1.5", "--N", "2", "--M", "3"], tmp_path) == 0
    meta, header, rows = read_csv(tmp_path / "crossings.csv")
    assert header[:6] == ["N", "M", "q", "g", "epsilon", "E"]
    assert [round(float(r[3]), 4) for r in rows] == [0.4804, 1.0287]
    assert meta["command"] == "crossings" and meta["delta"] == "1.5"


def test_crossings_two_photon_json(tmp_path):
    assert run(["crossings", "--model", "2p", "--q", "14", "--delta", "2", "--N", "2", "--M", "3",
                "--format", "csv,json"], tmp_path) == 0
    report = json.loads((tmp_path / "crossings.json").read_text())
    assert [round(p["g"], 4) for p in report["points"]] == [0.3015, 0.4686]
    assert [round(p["epsilon"], 4) for p in report["points"]] == [1.5954, 0.6974]


def test_twelve_significant_digits(tmp_path):
    run(["crossings", "--delta", "1.5", "--N", "1", "--M", "2"], tmp_path)
    _, _, rows = read_csv(tmp_path / "crossings.csv")
    digits = rows[0][3].replace("0.", "", 1).lstrip("0")
    assert len(digits) <= 12


def test_gcurve_with_oracle_and_svg(tmp_path):
    args = ["gcurve", "--model", "2p", "--q", "1/4", "--delta", "3", "--epsilon", "0.4", "--g", "0.35",
            "--samples", "301", "--oracle", "--format", "csv,json,svg"]
    assert run(args, tmp_path) == 0
    _, header, rows = read_csv(tmp_path / "gcurve.csv")
    assert header == ["E", "G"] and len(rows) == 301
    _, zheader, zrows = read_csv(tmp_path / "gcurve_zeros.csv")
    assert zheader == ["E_zero", "oracle", "abs_diff"]
    assert all(float(r[2]) < 1e-6 for r in zrows)
    assert (tmp_path / "gcurve.svg").read_text().startswith("<svg")
    assert json.loads((tmp_path / "gcurve.json").read_text())["oracle"]["success"]


def test_empty_window_gives_header_only(tmp_path):
    assert run(["gcurve", "--delta", "1", "--epsilon", "0.3", "--g", "0.3", "--e-window", "1:1"], tmp_path) == 0
    _, header, rows = read_csv(tmp_path / "gcurve.csv")
    assert header == ["E", "G"] and rows == []


def test_spectrum_two_photon_has_normalized_energy(tmp_path):
    args = ["spectrum", "--model", "2p", "--q", "1/4", "--delta", "2", "--k", "2",
            "--g-range", "0.30:0.42:0.04", "--e-window", "-1:3", "--points-per-unit", "500"]
    assert run(args, tmp_path) == 0
    _, header, rows = read_csv(tmp_path / "spectrum.csv")
    assert header[-1] == "E_norm" and rows
    _, sheader, srows = read_csv(tmp_path / "spectrum_special.csv")
    assert "degenerate" in {r[3] for r in srows}


def test_spectrum_output_is_deterministic(tmp_path):
    args = ["spectrum", "--delta", "1.5", "--epsilon", "0.5", "--g-range", "0.2:0.6:0.2",
            "--e-window", "-1:3", "--points-per-unit", "400", "--format", "csv,json,svg"]
    a, b = tmp_path / "a", tmp_path / "b"
    assert run(args, a) == 0 and run(args, b) == 0
    for name in ("spectrum.csv", "spectrum_special.csv", "spectrum.json", "spectrum.svg"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_exceptional_reports_rejected(tmp_path):
    args = ["exceptional", "--delta", "1.5", "--epsilon", "0.5", "--kind", "1A", "--index", "2",
            "--format", "json"]
    assert run(args, tmp_path) == 0
    report = json.loads((tmp_path / "exceptional.json").read_text())
    assert report["points"] and report["rejected"]


def test_census_defaults_to_both_models(tmp_path):
    assert run(["census", "--delta", "2", "--n-range", "1:3", "--m-range", "2:6"], tmp_path) == 0
    report = json.loads((tmp_path / "census.json").read_text())
    assert set(report["models"]) == {"1p", "2p"}
    for model in ("1p", "2p"):
        per_pair = report["models"][model]["per_pair"]
        assert all(count == int(pair.split(",")[0]) for pair, count in per_pair.items())
        assert report["models"][model]["total"] == 5 * 1 + 4 * 2 + 3 * 3


def test_census_single_model(tmp_path):
    assert run(["census", "--model", "1p", "--delta", "3", "--n-range", "1:1", "--m-range", "2:2"], tmp_path) == 0
    report = json.loads((tmp_path / "census.json").read_text())
    assert report["models"] == {"1p": {"q": None, "total": 0, "per_pair": {"1,2": 0}, "anomalies": []}}


def test_verify_pass_and_mismatch(tmp_path, monkeypatch):
    args = ["verify", "--model", "2p", "--q", "3/4", "--delta", "3", "--epsilon", "0.4", "--g", "0.35",
            "--e-window", "-1:6"]
    assert run(args, tmp_path) == 0
    assert json.loads((tmp_path / "verify.json").read_text())["pass"] is True

    real = cli.scan.spectrum_at

    def shifted(*a, **kw):
        roots = real(*a, **kw)
        return type(roots)([r + 1e-3 for r in roots])

    monkeypatch.setattr(cli.scan, "spectrum_at", shifted)
    assert run(args, tmp_path / "bad") == 3
    assert json.loads((tmp_path / "bad" / "verify.json").read_text())["pass"] is False


@pytest.mark.parametrize("args", [
    ["crossings", "--N", "1"],
    ["crossings", "--N", "2", "--M", "2"],
    ["gcurve", "--model", "2p", "--delta", "1", "--epsilon", "0", "--g", "0.3"],
    ["gcurve", "--model", "2p", "--q", "14", "--delta", "1", "--epsilon", "0", "--g", "0.6"],
    ["gcurve", "--delta", "1", "--epsilon", "0.1", "--k", "1", "--g", "0.3"],
    ["gcurve", "--delta", "-1", "--epsilon", "0.1", "--g", "0.3"],
    ["spectrum", "--delta", "1", "--epsilon", "0.1", "--g-range", "0.5:0.1:0.1"],
    ["spectrum", "--delta", "1", "--epsilon", "0.1", "--g-range", "0.1:0.5"],
    ["exceptional", "--delta", "1", "--epsilon", "0.5", "--kind", "9Z", "--index", "1"],
    ["crossings", "--N", "1", "--M", "2", "--format", "png"],
    ["spectrum", "--bogus"],
])
def test_invalid_input_exit_1(tmp_path, args):
    assert run(args, tmp_path) == 1
    assert not any(tmp_path.iterdir())


def test_numerical_failure_exit_2(tmp_path, monkeypatch):
    def boom(*a, **kw):
        raise ConvergenceError("forced")

    monkeypatch.setattr(cli.op, "find_degenerate_1p", boom)
    assert run(["crossings", "--N", "1", "--M", "2"], tmp_path) == 2
    assert not any(tmp_path.iterdir())


def test_help_and_version():
    runner = CliRunner()
    assert "crossings" in runner.invoke(cli.cli, ["--help"]).output
    assert cli.__version__ in runner.invoke(cli.cli, ["--version"]).output
    assert cli.main([]) == 0


class TestConfig:
    def test_round_trip(self):
        cfg = cli.RunConfig(model="2p", q="3/4", delta=2.0, k=2.0, g_range=[0.1, 0.4, 0.1], formats=["csv", "svg"])
        assert cli.RunConfig.from_json(cfg.to_json()) == cfg

    def test_defaults_match_schema(self):
        default = cli.RunConfig().to_dict()
        assert set(default) == set(SCHEMA["properties"])
        for key, value in default.items():
            assert SCHEMA["properties"][key]["default"] == value, key
        jsonschema.validate(default, SCHEMA)

    def test_schema_rejects_what_the_loader_rejects(self):
        for bad in ({"omega": "1"}, {"unknown": 1}, {"formats": ["png"]}):
            with pytest.raises(jsonschema.ValidationError):
                jsonschema.validate(bad, SCHEMA)
        with pytest.raises(cli.ValidationError):
            cli.RunConfig.from_dict({"omega": "1"})
        with pytest.raises(cli.ValidationError):
            cli.RunConfig.from_dict({"unknown": 1})
        with pytest.raises(cli.ValidationError):
            cli.RunConfig.from_json("[1, 2]")

    def test_file_with_flag_override(self, tmp_path):
        cfg = cli.RunConfig(model="1p", delta=3.0, N=1, M=3, out=str(tmp_path / "x"))
        path = tmp_path / "run.json"
        path.write_text(cfg.to_json())
        jsonschema.validate(json.loads(path.read_text()), SCHEMA)
        assert cli.main(["crossings", "--config", str(path), "--delta", "1.5"]) == 0
        _, _, rows = read_csv(tmp_path / "x" / "crossings.csv")
        assert [round(float(r[3]), 4) for r in rows] == [0.7806]

    def test_bad_config_file_exit_1(self, tmp_path):
        path = tmp_path / "run.json"
        path.write_text('{"delta": "big"}')
        assert cli.main(["crossings", "--config", str(path), "--N", "1", "--M", "2"]) == 1
