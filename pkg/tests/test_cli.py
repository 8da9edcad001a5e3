import csv
import io
import json

import numpy as np
import pytest

from uavnet.cli import main
from uavnet.network import build_example_unet, build_snet1, network_to_dict
from uavnet.simulator import draw_arrivals, trial_rng


def _rows(path):
    return list(csv.DictReader(io.StringIO(path.read_text())))


def test_validate_bundled(capsys):
    assert main(["validate", "--network", "snet1"]) == 0
    out = capsys.readouterr().out
    assert "12 nodes, 26 edges" in out and out.strip().endswith("PASS")


def test_validate_duplicate_edge(tmp_path, capsys):
    doc = network_to_dict(build_snet1())
    doc["edges"].append(dict(doc["edges"][3]))
    path = tmp_path / "dup.json"
    path.write_text(json.dumps(doc))
    assert main(["validate", "--network", str(path)]) == 1
    assert "duplicate edge" in capsys.readouterr().out


def test_validate_tight_spacing_names_nodes(capsys):
    assert main(["validate", "--network", "snet1", "--d-sep", "14"]) == 1
    out = capsys.readouterr().out
    for node in (4, 8, 10):
        assert f"FAIL node {node}:" in out
    assert "FAIL node 9:" not in out


def test_geometry_report(capsys):
    assert main(["geometry", "--network", "snet1"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert len(lines) == 13 and lines[0].split()[0] == "node"


def test_schedule_single(tmp_path, capsys):
    req = tmp_path / "r.csv"
    req.write_text("k,L_i,L_f,ETA\n1,1,6,4\n")
    assert main(["schedule", "--network", "snet1", "--requests", str(req),
                 "--out-dir", str(tmp_path / "o")]) == 0
    rows = _rows(tmp_path / "o" / "plans.csv")
    assert rows[0]["delay"] == "0.000000"
    manifest = json.loads((tmp_path / "o" / "manifest.json").read_text())
    assert manifest["command"] == "schedule" and len(manifest["network_sha256"]) == 64


def test_schedule_merge(tmp_path):
    # 5->9->10 and 8->9->10 merge on the exit of node 9
    req = tmp_path / "r.csv"
    req.write_text("k,L_i,L_f,ETA\n1,5,10,0\n2,8,10,2\n")
    out = tmp_path / "o"
    assert main(["schedule", "--network", "snet1", "--requests", str(req),
                 "--out-dir", str(out)]) == 0
    rows = _rows(out / "plans.csv")
    assert [r["route"] for r in rows] == ["5 9 10", "8 9 10"]
    assert rows[1]["STA"] == "5.000000"
    line = json.loads((out / "timelines.json").read_text())["timelines"]["9:9-10"]
    assert [k for _, k in line] == [1, 2]
    assert line[1][0] - line[0][0] == pytest.approx(5.0)


def test_schedule_thousand(tmp_path, capsys):
    net = build_example_unet()
    rng = trial_rng(0, 0)
    reqs, t = [], 0
    while len(reqs) < 1000:
        reqs += draw_arrivals(t, 0.5, net.terminals, rng, len(reqs) + 1, 1000 - len(reqs))
        t += 1
    req = tmp_path / "r.csv"
    req.write_text("k,L_i,L_f,ETA\n" + "".join(f"{r.k},{r.L_i},{r.L_f},{r.ETA}\n" for r in reqs))
    assert main(["schedule", "--requests", str(req), "--out-dir", str(tmp_path / "o")]) == 0
    assert "scheduled 1000 UAVs" in capsys.readouterr().out
    delays = np.array([float(r["delay"]) for r in _rows(tmp_path / "o" / "plans.csv")])
    assert (delays >= 0).all() and delays.max() > 0


def test_schedule_rejects_non_terminal(tmp_path, capsys):
    req = tmp_path / "r.csv"
    req.write_text("k,L_i,L_f,ETA\n1,4,5,0\n")
    assert main(["schedule", "--requests", str(req), "--out-dir", str(tmp_path / "o")]) == 1
    assert "not a terminal" in capsys.readouterr().out


def _sweep(out, *extra):
    return main(["sweep", "--network", "snet1", "--trials", "2", "--n-uav", "60",
                 "--out-dir", str(out), *extra])


def test_sweep_zero_row(tmp_path):
    assert _sweep(tmp_path, "--p-a", "0,0.5", "--t-min", "5") == 0
    rows = _rows(tmp_path / "summary.csv")
    zero = [r for r in rows if r["p_a"] == "0"]
    assert zero[0]["mean_max_delay"] == "0.000000"
    assert len(_rows(tmp_path / "trials.csv")) == 4
    assert (tmp_path / "uav" / "uav_tmin5_pa0.5_trial1.csv").exists()


def test_sweep_rerun_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert _sweep(a, "--p-a", "0.3,0.6", "--t-min", "5,2", "--seed", "4") == 0
    assert _sweep(b, "--p-a", "0.3,0.6", "--t-min", "5,2", "--seed", "4") == 0
    for name in ("trials.csv", "summary.csv"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_sweep_config_precedence(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"schema_version": 1, "p_a": [0.2], "t_min": [2.0],
                               "trials": 5, "per_uav_csv": False}))
    assert _sweep(tmp_path / "o", "--config", str(cfg)) == 0
    rows = _rows(tmp_path / "o" / "trials.csv")
    assert len(rows) == 2 and {r["t_min"] for r in rows} == {"2"}
    assert not (tmp_path / "o" / "uav").exists()


@pytest.mark.parametrize("doc", [{"schema_version": 2}, {"bogus": 1}])
def test_sweep_bad_config(tmp_path, capsys, doc):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps(doc))
    assert _sweep(tmp_path / "o", "--config", str(cfg)) == 1
    assert "FAIL" in capsys.readouterr().out
