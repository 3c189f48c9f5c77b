import csv
import json
import re

import numpy as np
import pytest

from lozi.cli import main, to_csv, write_atomic
from lozi.geometry import signed_area


def run(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr().out


def test_check_params(tmp_path, capsys):
    code, out = run(capsys, "check-params", "--a", "1.78", "--b", "-0.5", "--out", str(tmp_path))
    assert code == 0
    res = json.loads(out)
    assert res["in_U_minus"] is True
    assert {"a", "b", "seed", "budgets"} <= set(res)


def test_usage_errors_exit_2(tmp_path):
    for argv in (["check-params", "--a", "1.78"],
                 ["attractor", "--a", "1.78", "--b", "-0.5", "--samples", "0"],
                 ["sweep", "--a-range", "1", "2", "x", "--b-range", "0", "1", "2"],
                 ["verify", "--out", str(tmp_path)],
                 ["nonsense"]):
        with pytest.raises(SystemExit) as exc:
            main(argv)
        assert exc.value.code == 2


def test_numeric_failure_exit_1(tmp_path, capsys):
    code, out = run(capsys, "attractor", "--a", "2.5", "--b", "-0.5", "--out", str(tmp_path),
                    "--enclosure-steps", "0")
    assert code == 1
    err = json.loads(out)
    assert err["error"] == "LoziError" and err["command"] == "attractor"


def test_output_dir_from_environment(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("LOZI_OUTPUT_DIR", str(tmp_path / "env"))
    code, _ = run(capsys, "check-params", "--a", "1.78", "--b", "-0.5")
    assert code == 0
    assert (tmp_path / "env" / "check-params.json").exists()


def test_geometry_json_and_svg(tmp_path, capsys):
    code, _ = run(capsys, "geometry", "--a", "1.78", "--b", "-0.5", "--out", str(tmp_path))
    assert code == 0
    g = json.loads((tmp_path / "geometry.json").read_text())
    for key in ("H0", "G"):
        assert signed_area(np.array(g[key])) > 0
    svg = (tmp_path / "geometry.svg").read_text()
    assert svg.startswith("<?xml") and "<!-- generated" in svg and 'viewBox="0 0 ' in svg


def test_attractor_outputs_are_deterministic(tmp_path, capsys):
    args = ["attractor", "--a", "1.78", "--b", "-0.5", "--samples", "3000",
            "--enclosure-steps", "3", "--dh-gap", "2"]
    run(capsys, *args, "--out", str(tmp_path / "one"))
    run(capsys, *args, "--out", str(tmp_path / "two"))
    for name in ("attractor.csv", "enclosure.csv", "attractor.json"):
        assert (tmp_path / "one" / name).read_bytes() == (tmp_path / "two" / name).read_bytes()
    strip = lambda s: re.sub(r"<!-- generated .* -->\n", "", s)
    assert strip((tmp_path / "one" / "attractor.svg").read_text()) == \
        strip((tmp_path / "two" / "attractor.svg").read_text())
    rows = list(csv.reader((tmp_path / "one" / "attractor.csv").open()))
    assert rows[0] == ["x", "y"] and len(rows) == 3001
    # 17 significant digits round-trip exactly
    x = float(rows[1][0])
    assert format(x, ".17g") == rows[1][0]
    svg = (tmp_path / "one" / "attractor.svg").read_text()
    assert svg.count('r="0.5"') == 3000


def test_no_timestamp_flag(tmp_path, capsys):
    run(capsys, "manifold", "--a", "1.78", "--b", "-0.5", "--length-budget", "100",
        "--no-timestamp", "--out", str(tmp_path))
    assert "generated" not in (tmp_path / "manifold_unstable_X.svg").read_text()
    rows = list(csv.reader((tmp_path / "manifold_unstable_X.csv").open()))
    assert rows[0] == ["x", "y"]


def test_return_map_round_trip(tmp_path, capsys):
    code, out = run(capsys, "return-map", "--a", "1.95", "--b", "-0.05", "--out", str(tmp_path))
    assert code == 0 and json.loads(out)["case"] == "T2"
    code, out = run(capsys, "verify", "--from-file", str(tmp_path / "return-map.json"),
                    "--out", str(tmp_path))
    assert code == 0, out
    rep = json.loads((tmp_path / "verify.json").read_text())
    assert rep["checks"]["return_map_round_trip"]["max_cell_area_difference"] <= 1e-12


def test_geometry_round_trip(tmp_path, capsys):
    run(capsys, "geometry", "--a", "1.78", "--b", "-0.5", "--out", str(tmp_path))
    code, _ = run(capsys, "verify", "--from-file", str(tmp_path / "geometry.json"),
                  "--out", str(tmp_path))
    assert code == 0


def test_verify_suite_passes_in_region(tmp_path, capsys):
    code, out = run(capsys, "verify", "--a", "1.75", "--b", "-0.375", "--cone-samples", "2000",
                    "--enclosure-steps", "4", "--oracle-points", "300", "--out", str(tmp_path))
    assert code == 0, out


def test_verify_fails_outside_region(tmp_path, capsys):
    code, out = run(capsys, "verify", "--a", "1.8", "--b", "-0.48", "--cone-samples", "500",
                    "--enclosure-steps", "2", "--out", str(tmp_path))
    assert code == 1
    assert "in_region" in json.loads(out)["failed"]


def test_region_plot(tmp_path, capsys):
    code, _ = run(capsys, "region-plot", "--mark", "1.78", "-0.5", "--no-timestamp",
                  "--out", str(tmp_path))
    assert code == 0
    svg = (tmp_path / "region.svg").read_text()
    assert svg.count("<polyline") >= 4 and "<polygon" in svg


def test_sweep_parallel_matches_serial(tmp_path, capsys):
    grid = ["--a-range", "1.76", "1.78", "2", "--b-range", "-0.5", "-0.48", "2",
            "--samples", "2000", "--no-cases"]
    run(capsys, "sweep", *grid, "--out", str(tmp_path / "s"))
    run(capsys, "sweep", *grid, "--workers", "2", "--out", str(tmp_path / "p"))
    a = (tmp_path / "s" / "sweep.csv").read_bytes()
    assert a == (tmp_path / "p" / "sweep.csv").read_bytes()
    header = a.decode().splitlines()[0].split(",")
    assert header[:2] == ["a", "b"] and "dH_next_a" in header and "case" in header


def test_atomic_write_leaves_no_temp_files(tmp_path):
    write_atomic(tmp_path / "x.csv", to_csv(["v"], [[0.1]]))
    assert [p.name for p in tmp_path.iterdir()] == ["x.csv"]
    assert (tmp_path / "x.csv").read_text() == "v\n0.10000000000000001\n"
