import csv
import json
import logging
import math

import numpy as np
import pytest

from pseudosphere import cli
from pseudosphere import report as rpt
from pseudosphere.errors import ConfigError
from pseudosphere.geometry.discrete import icosphere, write_off


def write(tmp_path, name, obj):
    p = tmp_path / name
    p.write_text(json.dumps(obj, indent=2) if not isinstance(obj, str) else obj)
    return p


def read_csv(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


# formatting

@pytest.mark.parametrize("x", [0.1, 1 / 3, math.pi * 1e-300, 2.0**-1074, 1e22, -7.0, 123456789.123456789])
def test_fmt_round_trips(x):
    s = rpt.fmt(x)
    assert float(s) == x
    assert json.loads(s) == x


def test_fmt_special_values():
    assert rpt.fmt(float("nan")) == "null"
    assert rpt.fmt(float("inf")) == "null"
    assert rpt.fmt(3) == "3.0"


def test_dumps_is_valid_json():
    obj = {"a": np.arange(3.0) / 7, "b": {"c": [np.float64(0.1), None, True, "x"]}, "d": float("nan"),
           "e": [{"f": 1}], "g": np.int64(4)}
    back = json.loads(rpt.dumps(obj))
    assert back["a"] == (np.arange(3.0) / 7).tolist()
    assert back["b"]["c"] == [0.1, None, True, "x"]
    assert back["d"] is None and back["e"] == [{"f": 1}] and back["g"] == 4


def test_csv_cells(tmp_path):
    p = tmp_path / "t.csv"
    rpt.write_csv(str(p), ["x", "v"], [[1 / 3, [0.5, 2.0]]])
    row = read_csv(p)[0]
    assert float(row["x"]) == 1 / 3
    assert row["v"] == "0.5;2"


# config handling

def test_unknown_key_reports_line(tmp_path):
    p = write(tmp_path, "c.json", '{\n  "shape": {"kind": "ball", "n": 2},\n  "bogus": 1\n}\n')
    with pytest.raises(ConfigError) as info:
        cli.load_config(p)
    assert info.value.line == 3 and info.value.field == "bogus"


def test_malformed_json_reports_line(tmp_path):
    p = write(tmp_path, "c.json", '{\n  "shape": {"kind": "ball",\n  "n": }\n}\n')
    with pytest.raises(ConfigError) as info:
        cli.load_config(p)
    assert info.value.line == 3


@pytest.mark.parametrize("cfg, field", [
    ({"shape": {"kind": "ball", "n": 2}, "x0": [0, 0, 0]}, "x0"),
    ({"shape": {"kind": "ball", "n": 2}, "pipeline": "nope"}, "pipeline"),
    ({"shape": {"kind": "graph_patch", "n": 2, "profile": {"type": "paraboloid"}}}, "x0"),
    ({"shape": {"kind": "ellipse", "semi_axes": [1.0, -1.0]}}, "shape"),
    ({"shape": {"kind": "polyline", "file": "missing.csv"}}, "shape.file"),
    ({"x0": [0, 0]}, "shape"),
])
def test_config_field_errors(tmp_path, cfg, field):
    p = write(tmp_path, "c.json", cfg)
    with pytest.raises(ConfigError) as info:
        cli.load_config(p)
    assert info.value.field == field


def test_defaults_fill_in(tmp_path):
    cfg = cli.load_config(write(tmp_path, "c.json", {"shape": {"kind": "ball", "n": 2, "center": [1, 2]}}))
    assert cfg["pipeline"] == "stability"
    assert cfg["_x0"] == pytest.approx([1.0, 2.0])


def test_set_path_and_cells():
    data = {"shape": {"semi_axes": [1.0, 1.0]}}
    cli._set_path(data, "shape.semi_axes.0", 2.0)
    cli._set_path(data, "search.starts", 3)
    assert data == {"shape": {"semi_axes": [2.0, 1.0]}, "search": {"starts": 3}}
    names, cells = cli.sweep_cells({"grid": {"a": [1, 2], "b": [3, 4, 5]}})
    assert names == ["a", "b"] and len(cells) == 6
    with pytest.raises(ConfigError):
        cli.sweep_cells({"grid": {"a": []}})


def test_threads_from_environment(monkeypatch):
    monkeypatch.setenv("PSEUDOSPHERE_THREADS", "3")
    assert cli._threads(None) == 3
    assert cli._threads(2) == 2
    monkeypatch.setenv("PSEUDOSPHERE_THREADS", "many")
    with pytest.raises(ConfigError):
        cli._threads(None)
    monkeypatch.delenv("PSEUDOSPHERE_THREADS")
    assert cli._threads(None) == 1


# end to end

def test_oracles_command(tmp_path):
    assert cli.main(["oracles", "--dims", "2", "--out", str(tmp_path)]) == 0
    rep = json.loads((tmp_path / "report.json").read_text())
    assert rep["config"]["pipeline"] == "oracles"
    rows = read_csv(tmp_path / "table.csv")
    assert [r["check"] for r in rows] == ["appendix"] + ["poisson"] * 5
    assert float(rows[0]["value"]) == pytest.approx(-math.pi, abs=1e-4)
    assert all(float(r["achieved_error"]) < 1e-8 for r in rows[1:])


def test_gap_run(tmp_path):
    p = write(tmp_path, "gap.json", {"shape": {"kind": "ellipse", "semi_axes": [1.5, 1.0]}, "x0": [0, 0],
                                     "pipeline": "gap"})
    assert cli.main(["run", str(p), "--out", str(tmp_path / "o")]) == 0
    rep = json.loads((tmp_path / "o" / "report.json").read_text())
    assert rep["result"]["gap"]["value"] > 0.5


def test_index_run_writes_convergence_table(tmp_path):
    p = write(tmp_path, "idx.json", {"shape": {"kind": "halfspace_cap", "n": 2}, "x0": [0, -1.0],
                                     "z": [0, 0], "pipeline": "index"})
    assert cli.main(["run", "--config", str(p), "--out", str(tmp_path)]) == 0
    rows = read_csv(tmp_path / "convergence.csv")
    assert set(rows[0]) == set(rpt.CONVERGENCE_HEADER)
    rep = json.loads((tmp_path / "report.json").read_text())
    (idx,) = rep["result"]["indices"]
    assert idx["value"] == pytest.approx(1.0, abs=1e-3)


def test_stability_run_is_deterministic(tmp_path):
    cfg = {"label": "ellipse", "shape": {"kind": "ellipse", "semi_axes": [1.5, 1.0]}, "x0": [0, 0],
           "flatness": {"max_points": 2}}
    p = write(tmp_path, "s.json", cfg)
    for d in ("a", "b"):
        assert cli.main(["run", str(p), "--out", str(tmp_path / d), "--deterministic"]) == 0
    a = (tmp_path / "a" / "report.json").read_bytes()
    assert a == (tmp_path / "b" / "report.json").read_bytes()
    for row in read_csv(tmp_path / "a" / "table.csv"):
        assert float(row["margin"]) == float(row["gap"]) - float(row["rhs"])
        assert row["verdict"] == "Holds"
        assert row["classification"] == "NotAPseudosphere"


def test_violation_gives_exit_code_two(tmp_path, monkeypatch):
    p = write(tmp_path, "s.json", {"shape": {"kind": "ball", "n": 2}})
    monkeypatch.setattr(cli, "execute", lambda cfg, workers=1: ({}, (["x"], []), None, cli.EXIT_VIOLATED))
    assert cli.main(["run", str(p), "--out", str(tmp_path)]) == 2


def test_errors_give_exit_code_one(tmp_path, capsys):
    p = write(tmp_path, "s.json", {"shape": {"kind": "ball", "n": 2}, "x0": [3.0, 0.0], "pipeline": "gap"})
    assert cli.main(["run", str(p), "--out", str(tmp_path)]) == 1
    assert "CenterNotInterior" in capsys.readouterr().err
    assert cli.main(["run", str(tmp_path / "absent.json")]) == 1
    assert cli.main(["run"]) == 1


def test_sweep_and_resume(tmp_path, caplog):
    cfg = {"shape": {"kind": "ball", "n": 2, "radius": 1.0}, "x0": [0.0, 0.0], "pipeline": "gap",
           "search": {"seeds_per_shell": 8, "starts": 1}, "grid": {"x0.0": [0.0, 0.3]}}
    p = write(tmp_path, "sw.json", cfg)
    out = tmp_path / "sw"
    assert cli.main(["sweep", str(p), "--out", str(out)]) == 0
    rows = read_csv(out / "sweep.csv")
    assert [float(r["x0.0"]) for r in rows] == [0.0, 0.3]
    assert float(rows[0]["gap"]) < 1e-10
    assert float(rows[1]["gap"]) == pytest.approx(0.6, abs=5e-3)
    stamp = (out / "cells" / "cell_0001.json").stat().st_mtime_ns
    caplog.set_level(logging.INFO)
    assert cli.main(["sweep", str(p), "--out", str(out)]) == 0
    assert "already done" in caplog.text
    assert (out / "cells" / "cell_0001.json").stat().st_mtime_ns == stamp


def test_mesh_info_on_off_file(tmp_path, capsys):
    V, F = icosphere(4)
    p = tmp_path / "sphere.off"
    write_off(p, V, F)
    assert cli.main(["mesh-info", str(p)]) == 0
    text = capsys.readouterr().out
    assert "dimension: 3" in text and "enclosed volume" in text
    assert cli.main(["mesh-info", str(tmp_path / "nope.off")]) == 1
    bad = tmp_path / "bad.off"
    bad.write_text("OFF\n3 1 0\n0 0 zero\n")
    assert cli.main(["mesh-info", str(bad)]) == 1
