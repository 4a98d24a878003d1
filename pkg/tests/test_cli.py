import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from dbmapper.cli import RunConfig, main, run_pipeline, sweep_grid, worker_count
from dbmapper.cluster import Clusterer
from dbmapper.errors import InvalidParameterError
from dbmapper.geometry import LensMap, PointCloud, write_csv
from dbmapper.mapper import build_pullback_mapper
from dbmapper.persistence import PersistenceDiagram
from dbmapper.synthgen import ComponentSpec, SynthSpec, gen_circle, gen_genus1

from oracles import plain_mapper


@pytest.fixture
def line_csv(tmp_path):
    x = np.random.default_rng(0).uniform(0, 10, 300)
    path = tmp_path / "line.csv"
    write_csv(path, PointCloud(np.c_[x, np.zeros(300)]), LensMap(x), ["x", "y"])
    return path


@pytest.fixture
def circle_csv(tmp_path):
    spec = SynthSpec(seed=0, stratified=True, components=(ComponentSpec(400, 0.01, -1, 1),))
    d = gen_circle(spec)
    path = tmp_path / "circle.csv"
    write_csv(path, d.cloud, d.lens, ["x", "y"])
    return path, d


def test_run_writes_artifacts(tmp_path, circle_csv, capsys):
    path, _ = circle_csv
    outs = [tmp_path / f"g.{f}" for f in ("dot", "json", "graphml", "svg")]
    argv = ["run", "--input", str(path), "--N", "6", "--g", "0.5", "--delta", "0.2",
            "--rate-sensitivity", "0", "--manifest", str(tmp_path / "m.json")]
    for o in outs:
        argv += ["--out", str(o)]
    assert main(argv) == 0
    assert json.loads(capsys.readouterr().out)["beta1"] == 1
    assert all(o.exists() and o.stat().st_size > 0 for o in outs)
    m = json.loads((tmp_path / "m.json").read_text())
    assert m["parameters"]["N"] == 6 and m["graph"]["beta0"] == 1
    assert m["density"] is None and m["cover_resolution"] > 0


def test_manifest_is_deterministic(tmp_path, circle_csv):
    path, _ = circle_csv
    texts = []
    for i in range(2):
        mp = tmp_path / f"m{i}.json"
        main(["run", "--input", str(path), "--delta", "0.2", "--manifest", str(mp),
              "--out", str(tmp_path / f"g{i}.json")])
        texts.append((mp.read_text(), (tmp_path / f"g{i}.json").read_text()))
    assert texts[0][1] == texts[1][1]
    strip = lambda t: {k: v for k, v in json.loads(t).items() if k != "outputs"}
    assert strip(texts[0][0]) == strip(texts[1][0])


def test_standard_mode_equals_oracle(circle_csv):
    path, d = circle_csv
    cfg = RunConfig(input=str(path), N=7, g=0.4, delta=0.2, rate_sensitivity=0.0)
    graph, manifest = run_pipeline(cfg)
    verts, edges = plain_mapper(d.cloud.points, d.lens.values.tolist(),
                                [(iv.lo, iv.hi) for iv in manifest_cover(manifest)], 0.2)
    assert graph.canonical() == (verts, edges, False)


def manifest_cover(manifest):
    from dbmapper.cover import Interval

    return [Interval(a, b) for a, b in manifest["cover"]["intervals"]]


def test_genus1_dbscan_cell():
    d = gen_genus1(SynthSpec(seed=42))
    cfg = RunConfig(N=20, g=0.5, clusterer="dbscan", dbscan_eps=0.6, dbscan_min_weight=3,
                    rate_sensitivity=1.0)
    graph, manifest = run_pipeline(cfg, d.cloud, d.lens)
    assert (manifest["graph"]["beta0"], manifest["graph"]["beta1"]) == (2, 1)
    std, _ = run_pipeline(RunConfig(N=20, g=0.5, clusterer="dbscan", dbscan_eps=0.6,
                                    dbscan_min_weight=3, rate_sensitivity=0.0), d.cloud, d.lens)
    cover = std.info["cover"]
    ref = build_pullback_mapper(d.cloud, d.lens, cover,
                                Clusterer("dbscan", {"eps": 0.6, "min_weight": 3.0}))
    assert std == ref


def test_missing_lens_column(tmp_path, line_csv, capsys):
    rc = main(["run", "--input", str(line_csv), "--lens-column", "height", "--delta", "1"])
    assert rc == 1
    assert "height" in capsys.readouterr().err


def test_missing_input_file(tmp_path, capsys):
    assert main(["run", "--input", str(tmp_path / "nope.csv"), "--delta", "1"]) == 1


def test_usage_error_exit_code(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["run", "--N", "many"])
    assert exc.value.code == 1


def test_invalid_parameters(line_csv):
    assert main(["run", "--input", str(line_csv), "--delta", "1", "--g", "1.5"]) == 1
    assert main(["run", "--input", str(line_csv)]) == 1  # single linkage without delta
    assert main(["run", "--input", str(line_csv), "--clusterer", "dbscan",
                 "--dbscan-eps", "0.5"]) == 1


def test_config_file_and_flag_override(tmp_path, line_csv):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"input": str(line_csv), "N": 4, "g": 0.3, "delta": 2.0,
                               "rate-sensitivity": 0}))
    mp = tmp_path / "m.json"
    assert main(["run", "--config", str(cfg), "--N", "5", "--manifest", str(mp)]) == 0
    m = json.loads(mp.read_text())
    assert m["parameters"]["N"] == 5 and m["parameters"]["g"] == 0.3
    assert m["graph"]["V"] == 5
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"bogus": 1}))
    assert main(["run", "--config", str(bad)]) == 1
    nested = tmp_path / "nested.json"
    nested.write_text(json.dumps({"N": {"a": 1}}))
    with pytest.raises(InvalidParameterError):
        RunConfig.from_file(nested)


def test_line_sweep_all_correct(line_csv):
    cfg = RunConfig(input=str(line_csv), delta=2.0)
    rep = sweep_grid(cfg, [3, 5, 8], [0.3, 0.5], (1, 0))
    assert rep.correct_count("standard") == 6 and rep.correct_count("density") == 6
    d = rep.to_dict(include_runtime=False)
    assert d["correct_counts"] == {"standard": 6, "density": 6}
    assert "runtime_ms" not in d["cells"][0]
    assert rep.to_svg().count('stroke="#1a9a1a"') == 12
    assert "*" in rep.table("standard")


def test_sweep_parallel_matches_serial(line_csv):
    cfg = RunConfig(input=str(line_csv), delta=2.0)
    a = sweep_grid(cfg, [3, 5], [0.3, 0.5], (1, 0), workers=1)
    b = sweep_grid(cfg, [3, 5], [0.3, 0.5], (1, 0), workers=2)
    assert a.to_json(include_runtime=False) == b.to_json(include_runtime=False)


def test_sweep_empty_range(line_csv, capsys):
    with pytest.raises(InvalidParameterError):
        sweep_grid(RunConfig(input=str(line_csv), delta=2.0), [5], [], (1, 0))
    assert main(["sweep", "--input", str(line_csv), "--delta", "2", "--g-values", ""]) == 1


def test_sweep_records_cell_errors(line_csv):
    cfg = RunConfig(input=str(line_csv), delta=2.0, cover="data")
    rep = sweep_grid(cfg, [5, 1000], [0.3], (1, 0))
    assert rep.cell("standard", 1000, 0.3)["error"]
    assert rep.cell("standard", 5, 0.3)["correct"]


def test_sweep_cli(tmp_path, line_csv, capsys):
    rc = main(["sweep", "--input", str(line_csv), "--delta", "2", "--N-values", "3,5",
               "--g-values", "0.3,0.5", "--expected", "1,0", "--report",
               str(tmp_path / "r.json"), "--svg", str(tmp_path / "r.svg")])
    assert rc == 0
    out = capsys.readouterr().out
    assert "standard: 4/4 correct" in out and "density: 4/4 correct" in out
    assert json.loads((tmp_path / "r.json").read_text())["expected"] == [1, 0]
    assert (tmp_path / "r.svg").read_text().startswith("<svg")


def test_worker_env(monkeypatch):
    monkeypatch.setenv("DBMAPPER_WORKERS", "3")
    assert worker_count() == 3
    monkeypatch.setenv("DBMAPPER_WORKERS", "zero")
    with pytest.raises(InvalidParameterError):
        worker_count()


def test_synth_and_density(tmp_path):
    out = tmp_path / "t.csv"
    assert main(["synth", "three-component", "--seed", "1", "--out", str(out)]) == 0
    rows = list(csv.reader(out.open()))
    assert rows[0] == ["x0", "x1", "x2", "lens"] and len(rows) == 1551
    dens = tmp_path / "beta.csv"
    assert main(["density", "--input", str(out), "--out", str(dens)]) == 0
    rows = list(csv.DictReader(dens.open()))
    assert len(rows) == 1550
    c = np.array([float(r["c"]) for r in rows])
    assert np.all((c >= 1) & (c <= 3))
    comps = json.dumps([{"count": 50, "spread": 0.01, "lens_lo": -1, "lens_hi": 1}])
    assert main(["synth", "circle", "--components", comps, "--out", str(tmp_path / "c.csv")]) == 0


def test_verify_and_diagram(tmp_path, circle_csv, capsys):
    path, _ = circle_csv
    ref = tmp_path / "ref.csv"
    spec = SynthSpec(seed=1, stratified=True, components=(ComponentSpec(4000, 0.01, -1, 1),))
    dd = gen_circle(spec)
    write_csv(ref, dd.cloud, dd.lens, ["x", "y"])
    rc = main(["verify", "--input", str(path), "--delta", "0.2", "--N", "5",
               "--reference", str(ref)])
    out = capsys.readouterr().out
    assert rc == 0 and "PASS" in out and "omega(delta)" in out
    dg_path = tmp_path / "d.jsonl"
    assert main(["diagram", "--input", str(path), "--delta", "0.2", "--oracle",
                 "--out", str(dg_path)]) == 0
    dg = PersistenceDiagram.read(dg_path)
    assert dg.counts()["Ext0"] == 1 and dg.counts()["Ext1"] == 1
    assert main(["diagram", "--input", str(path), "--delta", "0.2"]) == 0
    assert '"kind": "Ext0"' in capsys.readouterr().out
    assert main(["diagram", "--input", str(path), "--oracle"]) == 1


def test_verify_failure_exit_code(monkeypatch, circle_csv, capsys):
    import dbmapper.cli as cli

    path, _ = circle_csv
    fake = {"r": 1.0, "omega": 0.0, "bound": 1.0, "bottleneck": 2.0,
            "intersection_crossing_edges": 0, "pass": False}
    monkeypatch.setattr(cli, "verify_bound", lambda *a, **k: fake)
    assert main(["verify", "--input", str(path), "--delta", "0.2"]) == 2
    captured = capsys.readouterr()
    assert "FAIL" in captured.out and "verification failed" in captured.err


def test_console_script_entry_point(line_csv):
    res = subprocess.run([sys.executable, "-m", "dbmapper.cli", "--version"],
                         capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout.strip() == "0.1.0"
