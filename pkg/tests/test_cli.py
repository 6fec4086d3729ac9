import csv
import io
import json
import subprocess
import sys

import pytest

from thurston_lab.cli import CliConfig, parse_point_spec, run, UsageError


def call(capsys, *argv):
    code = run(list(argv))
    return code, capsys.readouterr().out


def call_json(capsys, *argv):
    code, out = call(capsys, *argv)
    return code, json.loads(out)


class TestExamples:
    def test_distance_identity(self, capsys):
        code, out = call_json(capsys, "distance", "--surface", "s11", "--from", "l=1.9248,tau=T0",
                              "--to", "l=1.9248,tau=T0")
        assert code == 0
        assert out["result"]["distance"] == "0.0"
        assert out["command"] == "distance"

    def test_selftest_lists_criteria(self, capsys):
        code, out = call_json(capsys, "selftest", "--bits", "128", "--depth", "14", "--seed", "7", "--only", "2,11")
        assert code == 0
        assert [r["criterion"] for r in out["rows"]] == [2, 11]
        assert out["verdict"] == {"checks": {"2": "PASS", "11": "PASS"}, "result": "PASS"}

    def test_sphere_svg(self, capsys):
        code, out = call(capsys, "sphere", "--surface", "s04", "--depth", "12", "--format", "svg")
        assert code == 0
        assert out.lstrip().startswith("<svg") and "<polygon" in out
        assert ">1/0<" in out and ">1/1<" in out

    def test_console_script(self):
        proc = subprocess.run([sys.executable, "-m", "thurston_lab.cli", "delta", "--l", "3", "--t", "0"],
                              capture_output=True, text=True)
        assert proc.returncode == 0
        assert json.loads(proc.stdout)["command"] == "delta"


class TestErrors:
    def test_bad_point_is_a_usage_error(self, capsys):
        with pytest.raises(SystemExit) as info:
            run(["distance", "--from", "l=abc,tau=0"])
        assert info.value.code == 2
        assert "--from" in capsys.readouterr().err

    def test_unknown_command(self):
        with pytest.raises(SystemExit) as info:
            run(["frobnicate"])
        assert info.value.code == 2

    def test_unsupported_format(self, capsys):
        with pytest.raises(SystemExit) as info:
            run(["delta", "--l", "3", "--t", "1", "--format", "svg"])
        assert info.value.code == 2
        assert "--format" in capsys.readouterr().err

    def test_nonpositive_length_exits_3(self, capsys):
        code, out = call_json(capsys, "norm", "--point", "l=-1,tau=0", "--vector", "1,0")
        assert code == 3
        assert "error" in out

    def test_zero_vector_exits_3(self, capsys):
        code, out = call_json(capsys, "norm", "--vector", "0,0", "--depth", "6")
        assert code == 3

    def test_bad_env(self, monkeypatch):
        monkeypatch.setenv("THURSTON_BITS", "lots")
        with pytest.raises(SystemExit) as info:
            run(["delta", "--l", "3", "--t", "1"])
        assert info.value.code == 2


class TestOutputs:
    def test_env_sets_precision(self, capsys, monkeypatch):
        monkeypatch.setenv("THURSTON_BITS", "256")
        monkeypatch.setenv("THURSTON_DEPTH", "6")
        _, out = call_json(capsys, "norm", "--vector", "1,0")
        assert out["meta"]["bits"] == 256 and out["meta"]["depth"] == 6

    def test_flag_beats_env(self, capsys, monkeypatch):
        monkeypatch.setenv("THURSTON_BITS", "256")
        _, out = call_json(capsys, "norm", "--vector", "1,0", "--bits", "96", "--depth", "6")
        assert out["meta"]["bits"] == 96

    def test_full_precision_digits(self, capsys):
        _, out = call_json(capsys, "delta", "--l", "3", "--t", "0.2", "--bits", "256")
        assert out["result"]["delta"].startswith("0.6719260690179018340287518130047356013184759")

    def test_byte_identical(self, capsys):
        argv = ("gamma", "--surface", "s04", "--from", "l=2.6,tau=0.2", "--to", "l=3.4,tau=-0.5",
                "--samples", "4", "--depth", "8")
        assert call(capsys, *argv) == call(capsys, *argv)

    def test_output_file(self, capsys, tmp_path):
        path = tmp_path / "facet.json"
        code = run(["facet", "--slope", "1/0", "--output", str(path)])
        assert code == 0
        assert json.loads(path.read_text())["result"]["slope"] == "1/0"

    def test_csv_table(self, capsys):
        code, out = call(capsys, "facet-table", "--levels", "1", "--format", "csv", "--depth", "8")
        assert code == 0
        rows = list(csv.reader(io.StringIO(out)))
        header = next(r for r in rows if r and not r[0].startswith("#"))
        assert header[:4] == ["slope", "l_alpha", "facet_length", "converged"]

    def test_stretch_law(self, capsys):
        code, out = call_json(capsys, "stretch", "--t", "0.05", "--depth", "8")
        assert code == 0 and out["verdict"] == "PASS"

    def test_failing_verdict_exits_1(self, capsys):
        code, out = call_json(capsys, "isometry-check", "--matrix", "1.1,0,0,1", "--samples", "4", "--depth", "8")
        assert code == 1
        assert out["verdict"]["result"] == "FAIL"

    def test_mapping_class_isometry_passes(self, capsys):
        code, out = call_json(capsys, "isometry-check", "--mapping-class", "1,1,0,1", "--samples", "4", "--depth", "8")
        assert code == 0


class TestConfig:
    def test_round_trip(self):
        cfg = CliConfig("norm", "s04", "2.5", "T0", 192, 10, 3, "csv", None)
        assert CliConfig.from_dict(json.loads(json.dumps(cfg.to_dict()))) == cfg

    def test_point_tokens(self):
        assert parse_point_spec("l=L0,tau=T0", "--point") == ("L0", "T0")
        assert parse_point_spec("l=2", "--point") == ("2", "T0")
        with pytest.raises(UsageError):
            parse_point_spec("l=2,tau=1e", "--point")
        with pytest.raises(UsageError):
            parse_point_spec("x=2,tau=0", "--point")
