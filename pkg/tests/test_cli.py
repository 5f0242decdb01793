import io as stdio
import json
import math

import pytest

from adeloops import cli, io


def run(*argv):
    out, err = stdio.StringIO(), stdio.StringIO()
    code = cli.main(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


def test_no_arguments_prints_usage():
    code, out, err = run()
    assert code == 2 and "usage" in err and out == ""


def test_unknown_flag():
    code, _, err = run("spectra", "--graph", "A3", "--bogus", "1")
    assert code == 2 and "unrecognized" in err


def test_missing_required_value():
    code, _, err = run("spectra")
    assert code == 1 and "graph" in err


def test_bad_graph_is_reported():
    code, _, err = run("spectra", "--graph", "Q7")
    assert code == 1 and err.startswith("adeloops spectra:")


def test_spectra_report():
    code, out, _ = run("spectra", "--graph", "A3")
    assert code == 0
    d = json.loads(out)
    io.validate_report(d)
    assert d["report"] == "spectra" and d["schema_version"] == io.SCHEMA_VERSION
    assert d["lambda"] == pytest.approx(math.sqrt(2), abs=1e-12)
    assert d["h"] == 4 and d["kappa_dilute"] == pytest.approx(16 / 5)


def test_outputs_byte_identical():
    a = run("sample", "--graph", "A3", "--sweeps", "300", "--seed", "9")[1]
    b = run("sample", "--graph", "A3", "--sweeps", "300", "--seed", "9")[1]
    assert a == b
    assert run("sample", "--graph", "A3", "--sweeps", "300", "--seed", "10")[1] != a


def test_timing_is_opt_in():
    d = json.loads(run("spectra", "--graph", "A2", "--timing")[1])
    assert "timing" in d["manifest"]
    assert "timing" not in json.loads(run("spectra", "--graph", "A2")[1])["manifest"]
    # the checksum ignores timing
    assert d["manifest"]["checksum"] == json.loads(run("spectra", "--graph", "A2")[1])["manifest"]["checksum"]


def test_bool_flag_values():
    d = json.loads(run("spectra", "--graph", "A2", "--timing", "false")[1])
    assert "timing" not in d["manifest"]


@pytest.mark.parametrize("argv", [
    ("enumerate", "--graph", "A3", "--bc", "chordal:1,2", "--rows", "3", "--cols", "4"),
    ("enumerate", "--model", "dense", "--graph", "A3", "--bc", "wired:1", "--rows", "4", "--cols", "4"),
    ("oracle", "--n", "1.0", "--bc", "chordal:1,2"),
    ("oracle", "--model", "dense", "--Q", "2", "--rows", "4", "--cols", "4"),
    ("clusters", "--rows", "6", "--cols", "6", "--sweeps", "20"),
    ("arch", "--graph", "A2", "--heights", "1,2,1,2", "--breaks", "8,31,55,21", "--kappa", "3"),
    ("sle", "--brownian", "4", "--count", "50"),
])
def test_subcommands_produce_valid_reports(argv):
    code, out, err = run(*argv)
    assert code == 0, err
    io.validate_report(json.loads(out))


def test_enumerate_agrees():
    d = json.loads(run("enumerate", "--graph", "D4", "--bc", "homogeneous:2", "--rows", "3", "--cols", "4")[1])
    assert d["relative_error"] < 1e-10


def test_arch_report():
    d = json.loads(run("arch", "--graph", "A2", "--heights", "1,2,1,2", "--breaks", "8,31,55,21")[1])
    assert sorted(d["probabilities"].values()) == pytest.approx([0.5, 0.5], abs=1e-12)


def test_config_resolution(tmp_path):
    cfg = tmp_path / "run.ini"
    cfg.write_text("[common]\nseed = 4\n\n[sample]\ngraph = A3\nsweeps = 120\n")
    d = json.loads(run("sample", "--config", str(cfg))[1])
    p = d["manifest"]["parameters"]
    assert (p["graph"], p["sweeps"], p["seed"]) == ("A3", 120, 4)
    # flags win over the file
    d = json.loads(run("sample", "--config", str(cfg), "--sweeps", "150")[1])
    assert d["manifest"]["parameters"]["sweeps"] == 150


def test_empty_config_is_defaults(tmp_path):
    cfg = tmp_path / "empty.ini"
    cfg.write_text("")
    a = run("spectra", "--graph", "E6", "--config", str(cfg))[1]
    assert a == run("spectra", "--graph", "E6")[1]


def test_malformed_config_names_the_line(tmp_path):
    cfg = tmp_path / "bad.ini"
    cfg.write_text("[sample]\ngraph = A3\nthis line is wrong\n")
    code, _, err = run("sample", "--config", str(cfg))
    assert code == 1 and ":3:" in err
    cfg.write_text("graph = A3\n")
    code, _, err = run("sample", "--config", str(cfg))
    assert code == 1 and ":1:" in err


def test_unknown_config_key(tmp_path):
    cfg = tmp_path / "k.ini"
    cfg.write_text("[spectra]\ncolour = red\n")
    code, _, err = run("spectra", "--graph", "A3", "--config", str(cfg))
    assert code == 1 and "colour" in err


def test_csv_stream(tmp_path):
    path = tmp_path / "obs.csv"
    code, _, _ = run("sample", "--graph", "A3", "--sweeps", "40", "--csv", str(path))
    lines = path.read_text().splitlines()
    assert code == 0 and lines[0].split(",")[0] == "sweep" and len(lines) == 41


def test_threads_env(monkeypatch):
    monkeypatch.setenv(cli.THREADS_ENV, "2")
    d = json.loads(run("spectra", "--graph", "A3")[1])
    assert d["manifest"]["parameters"]["threads"] == 2


@pytest.mark.slow
def test_selftest_passes():
    code, out, _ = run("selftest")
    d = json.loads(out)
    assert code == 0 and d["passed"] and len(d["checks"]) >= 8
