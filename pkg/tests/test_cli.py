import csv
import json
import math

import pytest

from curvlab.cli import EXIT_CONFIG, EXIT_FAIL, EXIT_OK, RECORD_COLUMNS, fmt, main
from curvlab.records import ProbeRecord

SMALL = {
    "surfaces": {
        "plane": {"builtin": "plane"},
        "sphere": {"builtin": "sphere", "params": {"R": 1, "axis": "x", "center": [0, 0, 1]}},
    },
    "checks": [
        {"check": "curvature_invariants", "surface": "sphere"},
        {"check": "density", "surface": "sphere", "params": {"radii": [0.5, 1.0], "expected": math.pi}},
        {"check": "simons", "surface": "plane"},
        {"check": "theorem_probe", "surface": "plane", "params": {"s": 0.5}},
    ],
}


def _write(tmp_path, cfg, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(cfg))
    return str(p)


def _rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_fmt():
    assert fmt(None) == ""
    assert fmt(0.1) == "0.10000000000000001"
    assert fmt(float("nan")) == "nan"
    assert float(fmt(math.pi)) == math.pi


def test_verify_small(tmp_path):
    out = tmp_path / "out"
    assert main(["verify", "--config", _write(tmp_path, SMALL), "--out", str(out), "--quiet"]) == EXIT_OK
    report = json.loads((out / "report.json").read_text())
    assert report["summary"]["fail"] == 0 and report["summary"]["probe"] == 1
    with open(out / "records.csv") as fh:
        assert fh.readline().strip() == ",".join(RECORD_COLUMNS)
    with open(out / "probes.csv") as fh:
        assert fh.readline().strip() == ",".join(ProbeRecord.CSV_COLUMNS)


def test_verify_deterministic(tmp_path):
    cfg = _write(tmp_path, SMALL)
    main(["verify", "--config", cfg, "--out", str(tmp_path / "a"), "--quiet"])
    main(["verify", "--config", cfg, "--out", str(tmp_path / "b"), "--quiet"])
    for name in ("records.csv", "probes.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_verify_failing_record(tmp_path):
    cfg = dict(SMALL, checks=[{"check": "density", "surface": "sphere",
                               "params": {"radii": [0.5], "expected": 3.0}}])
    assert main(["verify", "--config", _write(tmp_path, cfg), "--out", str(tmp_path / "o"), "--quiet"]) == EXIT_FAIL


@pytest.mark.parametrize("cfg", [
    {"surfaces": {"g": {"graph": "u +* v"}}, "checks": [{"check": "simons", "surface": "g"}]},
    {"surfaces": {}, "checks": [{"check": "simons", "surface": "missing"}]},
    {"surfaces": {}, "checks": [{"check": "no_such_check"}]},
    {"checks": []},
    {"surfaces": {"p": {"builtin": "plane"}}, "checks": [{"check": "mvi", "surface": "p", "params": {"field": "sin("}}]},
])
def test_verify_config_errors(tmp_path, cfg):
    assert main(["verify", "--config", _write(tmp_path, cfg), "--out", str(tmp_path / "o"), "--quiet"]) == EXIT_CONFIG


def test_verify_unreadable_config(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["verify", "--config", str(bad), "--out", str(tmp_path / "o")]) == EXIT_CONFIG
    assert main(["verify", "--config", str(tmp_path / "nope.json")]) == EXIT_CONFIG


def test_argument_errors(capsys):
    assert main([]) == EXIT_CONFIG
    assert main(["counterexample", "--alpha", "0.3"]) == EXIT_CONFIG
    assert main(["counterexample", "--alpha", "0.3", "--eps", "a,b"]) == EXIT_CONFIG
    assert main(["verify", "--resolution-scale", "0"]) == EXIT_CONFIG
    assert main(["--help"]) == EXIT_OK


@pytest.mark.parametrize("alpha", ["0.6", "0", "0.5"])
def test_counterexample_bad_alpha(alpha):
    assert main(["counterexample", "--alpha", alpha, "--eps", "0.01"]) == EXIT_CONFIG


def test_counterexample(tmp_path):
    out = tmp_path / "cx.csv"
    assert main(["counterexample", "--alpha", "0.49", "--eps", "0.01,0.001", "--out", str(out)]) == EXIT_OK
    rows = _rows(out)
    assert list(rows[0]) == ["eps", "L2_A2", "W12_H", "A_at_origin"]
    assert [float(r["eps"]) for r in rows] == [0.01, 0.001]
    for r in rows:
        assert float(r["A_at_origin"]) == pytest.approx(math.sqrt(2), abs=1e-6)
    assert float(rows[1]["L2_A2"]) < float(rows[0]["L2_A2"])


def test_counterexample_stdout(capsys):
    assert main(["counterexample", "--alpha", "0.3", "--eps", "0.01"]) == EXIT_OK
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0] == "eps,L2_A2,W12_H,A_at_origin" and len(lines) == 2


def test_probe_spheres(tmp_path):
    fam = [{"builtin": "sphere", "params": {"R": R}, "base": [1.0, 1.0]} for R in (2, 5, 10)]
    out = tmp_path / "p.csv"
    assert main(["probe", "--family", json.dumps(fam), "--s", "0.5,1.0", "--out", str(out)]) == EXIT_OK
    rows = _rows(out)
    assert len(rows) == 6
    for r, (R, s) in zip(rows, [(R, s) for R in (2, 5, 10) for s in (0.5, 1.0)]):
        assert float(r["s2A0"]) == pytest.approx(2 * s * s / R ** 2, rel=1e-12)


def test_probe_skips_large_ball(capsys):
    assert main(["probe", "--family", "sphere", "--s", "0.5 3.5"]) == EXIT_OK
    cap = capsys.readouterr()
    assert "skip" in cap.err
    assert len(cap.out.strip().splitlines()) == 2


def test_probe_bad_family():
    assert main(["probe", "--family", "nosuchsurface", "--s", "1"]) == EXIT_CONFIG


def test_norms(capsys):
    assert main(["norms", "--surface", 'cylinder:{"R": 2}', "--s", "1", "--p", "3"]) == EXIT_OK
    d = json.loads(capsys.readouterr().out)
    assert d["starred_W1p"] == pytest.approx(math.pi / 8, abs=1e-6)
    assert main(["norms", "--surface", "plane", "--ball", "extrinsic"]) == EXIT_OK
    assert json.loads(capsys.readouterr().out)["area"] == pytest.approx(math.pi, abs=1e-9)
