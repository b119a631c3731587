"""End-to-end checks of the batch interface: exit codes, payloads, loaders."""

import json
import math
import subprocess
import sys

import numpy as np
import pytest

from centroaffine import cli
from centroaffine.polygons import regular_polygon

REPORT_KEYS = {"command", "inputs", "results", "bounds", "satisfied", "flags"}


def run_cli(capsys, argv):
    """Invoke the entry point in-process and capture both streams."""
    rc = cli.main(argv)
    captured = capsys.readouterr()
    return rc, captured.out, captured.err


def run_json(capsys, argv):
    rc, out, err = run_cli(capsys, argv)
    return rc, json.loads(out), err


def write_json(path, data):
    path.write_text(json.dumps(data))
    return str(path)


class TestHappyPaths:
    def test_polygon_min(self, capsys):
        rc, rep, _ = run_json(
            capsys, ["polygon-min", "--n", "4", "--trials", "2", "--seed", "7"]
        )
        assert rc == 0
        assert REPORT_KEYS <= set(rep)
        assert rep["command"] == "polygon-min"
        assert rep["inputs"] == {"n": 4, "trials": 2, "seed": 7}
        assert rep["results"]["energy"] == pytest.approx(4.0 * math.sqrt(2.0))
        assert rep["results"]["gap"] >= -1e-9
        assert rep["flags"]["converged"] is True

    def test_bs_check(self, capsys):
        rc, rep, _ = run_json(
            capsys, ["bs-check", "--n", "5", "--trials", "10", "--seed", "3"]
        )
        assert rc == 0
        assert rep["results"]["checked"] == 10
        assert rep["results"]["max_product"] <= rep["bounds"]["area_product"] + 1e-8
        assert rep["results"]["min_slack"] >= -1e-8

    def test_ialpha_sweep(self, capsys):
        rc, rep, _ = run_json(capsys, ["ialpha-sweep", "--grid", "8"])
        assert rc == 0
        rows = rep["results"]["sweep"]
        assert len(rows) == 9
        # circle: value equals the bound sin(alpha) at every sample
        for alpha, value, bound in rows:
            assert value == pytest.approx(bound, abs=1e-9)
        assert rep["results"]["min_gap"] >= -1e-9

    def test_hessian_scan(self, capsys):
        rc, rep, _ = run_json(capsys, ["hessian-scan", "--n", "8", "--grid", "100"])
        assert rc == 0
        assert rep["results"]["orders"] == [4, 6, 8]
        assert min(rep["results"]["min_values"]) > 0.0
        assert rep["flags"]["all_modes_positive"] is True

    def test_schwarzian_check(self, capsys):
        rc, rep, _ = run_json(
            capsys, ["schwarzian-check", "--trials", "3", "--seed", "1"]
        )
        assert rc == 0
        assert rep["results"]["identity_average"] == pytest.approx(math.pi, abs=1e-9)
        assert rep["results"]["max_average"] <= math.pi + 1e-7
        assert rep["results"]["max_area_product"] <= math.pi**2 + 1e-7

    def test_criticality_circle(self, capsys):
        rc, rep, _ = run_json(capsys, ["criticality", "--alpha", "1.0"])
        assert rc == 0
        assert rep["results"]["max_residual"] < 1e-9

    def test_conjecture_search(self, capsys):
        rc, rep, _ = run_json(
            capsys,
            ["conjecture-search", "--n", "2", "--trials", "1", "--grid", "8",
             "--seed", "5"],
        )
        assert rc == 0
        assert rep["results"]["best_deficit"] >= rep["bounds"]["deficit_floor"]

    def test_billiard_orbit_necklace(self, capsys):
        rc, rep, _ = run_json(
            capsys,
            ["billiard-orbit", "--table", "square", "--x0", "2.5,0.7",
             "--steps", "12"],
        )
        assert rc == 0
        pts = np.asarray(rep["results"]["points"])
        assert pts.shape == (13, 2)
        np.testing.assert_allclose(pts[12], pts[0], atol=1e-9)

    def test_farfield_error_decays(self, capsys):
        rc, rep, _ = run_json(
            capsys,
            ["farfield-error", "--table", "triangle", "--radius", "200",
             "--radius", "800"],
        )
        assert rc == 0
        e_near, e_far = rep["results"]["errors"]
        assert e_far < e_near

    def test_abstime_square(self, capsys):
        rc, rep, _ = run_json(capsys, ["abstime", "--table", "square"])
        assert rc == 0
        assert rep["results"]["absolute_period"] == pytest.approx(math.sqrt(2.0))
        assert rep["flags"]["equals_lower"] is True
        assert rep["flags"]["equals_upper"] is True

    def test_abstime_circle(self, capsys):
        rc, rep, _ = run_json(capsys, ["abstime", "--table", "circle"])
        assert rc == 0
        assert rep["results"]["absolute_period"] == pytest.approx(0.5 * math.pi)
        assert rep["flags"]["equals_upper"] is True
        assert rep["flags"]["equals_lower"] is False

    def test_chord_check(self, capsys):
        rc, rep, _ = run_json(capsys, ["chord-check", "--trials", "2", "--seed", "9"])
        assert rc == 0
        assert rep["results"]["min_loop_slack"] >= -1e-8
        assert rep["results"]["min_polygon_slack"] >= -1e-8

    def test_help_exits_zero(self, capsys):
        rc, out, _ = run_cli(capsys, ["--help"])
        assert rc == 0
        assert "polygon-min" in out


class TestUsageErrors:
    def test_no_command(self, capsys):
        rc, _, err = run_cli(capsys, [])
        assert rc == 1
        assert "error" in err

    def test_unknown_command(self, capsys):
        rc, _, err = run_cli(capsys, ["frobnicate"])
        assert rc == 1

    def test_unknown_flag(self, capsys):
        rc, _, err = run_cli(capsys, ["polygon-min", "--bogus", "1"])
        assert rc == 1

    def test_sweep_takes_no_seed(self, capsys):
        rc, _, _ = run_cli(capsys, ["ialpha-sweep", "--seed", "1"])
        assert rc == 1

    def test_missing_start_point(self, capsys):
        rc, _, _ = run_cli(capsys, ["billiard-orbit", "--table", "square"])
        assert rc == 1

    def test_malformed_start_point(self, capsys):
        rc, _, err = run_cli(
            capsys, ["billiard-orbit", "--table", "square", "--x0", "abc"]
        )
        assert rc == 1
        assert "--x0" in err

    def test_polygon_min_needs_n(self, capsys):
        rc, _, _ = run_cli(capsys, ["polygon-min", "--n", "2"])
        assert rc == 1

    def test_bs_check_needs_source(self, capsys):
        rc, _, _ = run_cli(capsys, ["bs-check"])
        assert rc == 1

    def test_table_and_infile_conflict(self, capsys, tmp_path):
        path = write_json(tmp_path / "t.json", {"kind": "polygon", "vertices": []})
        rc, _, err = run_cli(capsys, ["abstime", "--table", "square", "--in", path])
        assert rc == 1
        assert "not both" in err

    def test_table_required(self, capsys):
        rc, _, _ = run_cli(capsys, ["abstime"])
        assert rc == 1

    def test_sweep_grid_too_small(self, capsys):
        rc, _, _ = run_cli(capsys, ["ialpha-sweep", "--grid", "1"])
        assert rc == 1


class TestInputErrors:
    def test_missing_file(self, capsys):
        rc, _, err = run_cli(capsys, ["bs-check", "--in", "/nonexistent.json"])
        assert rc == 1
        assert "cannot read" in err

    def test_invalid_json(self, capsys, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{not json")
        rc, _, err = run_cli(capsys, ["bs-check", "--in", str(path)])
        assert rc == 1
        assert "not valid JSON" in err

    def test_non_object_json(self, capsys, tmp_path):
        path = write_json(tmp_path / "arr.json", [1, 2, 3])
        rc, _, err = run_cli(capsys, ["bs-check", "--in", path])
        assert rc == 1
        assert "JSON object" in err

    def test_polygon_count_mismatch(self, capsys, tmp_path):
        verts = regular_polygon(5).vertices.tolist()
        path = write_json(tmp_path / "p.json", {"n": 4, "vertices": verts})
        rc, _, err = run_cli(capsys, ["bs-check", "--in", path])
        assert rc == 1
        assert "does not match" in err

    def test_polygon_bad_cross_products(self, capsys, tmp_path):
        verts = [[2.0, 0.0], [0.0, 1.0], [-1.0, 0.5], [-0.5, -1.0], [1.0, -1.0]]
        path = write_json(tmp_path / "p.json", {"vertices": verts})
        rc, _, err = run_cli(capsys, ["bs-check", "--in", path])
        assert rc == 1
        assert "invalid input" in err

    def test_curve_wrong_half_period(self, capsys, tmp_path):
        path = write_json(
            tmp_path / "c.json",
            {"half_period": 1.0, "harmonics": [[4, 0.01, 0.0]]},
        )
        rc, _, err = run_cli(capsys, ["criticality", "--in", path])
        assert rc == 1
        assert "half period" in err

    def test_curve_bad_row(self, capsys, tmp_path):
        path = write_json(tmp_path / "c.json", {"harmonics": [[4, 0.01]]})
        rc, _, err = run_cli(capsys, ["criticality", "--in", path])
        assert rc == 1
        assert "[order, re, im]" in err

    def test_curve_not_a_diffeo(self, capsys, tmp_path):
        path = write_json(tmp_path / "c.json", {"harmonics": [[4, 0.2, 0.0]]})
        rc, _, err = run_cli(capsys, ["criticality", "--in", path])
        assert rc == 1
        assert "invalid input" in err

    def test_table_unknown_kind(self, capsys, tmp_path):
        path = write_json(tmp_path / "t.json", {"kind": "blob", "values": [1.0]})
        rc, _, err = run_cli(capsys, ["abstime", "--in", path])
        assert rc == 1
        assert "kind" in err


class TestViolations:
    def test_orbit_from_interior_point(self, capsys):
        rc, rep, _ = run_json(
            capsys,
            ["billiard-orbit", "--table", "square", "--x0", "0.3,-0.2"],
        )
        assert rc == 2
        assert rep["satisfied"] is False
        assert "singular" in rep["flags"]

    def test_orbit_hits_singular_set(self, capsys):
        rc, rep, _ = run_json(
            capsys,
            ["billiard-orbit", "--table", "square", "--x0", "1,-3"],
        )
        assert rc == 2
        assert rep["satisfied"] is False

    def test_perturbed_curve_not_critical(self, capsys, tmp_path):
        path = write_json(
            tmp_path / "c.json",
            {"half_period": math.pi, "harmonics": [[4, 0.03, 0.0]]},
        )
        rc, rep, _ = run_json(capsys, ["criticality", "--in", path, "--alpha", "1.0"])
        assert rc == 2
        assert rep["results"]["max_residual"] > 1e-3


class TestFileRoundTrips:
    def test_polygon_file(self, capsys, tmp_path):
        verts = regular_polygon(5).vertices.tolist()
        path = write_json(tmp_path / "p.json", {"n": 5, "vertices": verts})
        rc, rep, _ = run_json(capsys, ["bs-check", "--in", path])
        assert rc == 0
        assert rep["results"]["checked"] == 1
        # the regular polygon attains the bound
        assert rep["results"]["min_slack"] == pytest.approx(0.0, abs=1e-9)

    def test_curve_file(self, capsys, tmp_path):
        path = write_json(
            tmp_path / "c.json",
            {"half_period": math.pi, "harmonics": [[4, 0.02, 0.01]]},
        )
        rc, rep, _ = run_json(capsys, ["ialpha-sweep", "--grid", "4", "--in", path])
        assert rc == 0
        assert rep["inputs"]["source"] == path
        assert rep["results"]["min_gap"] >= -1e-7

    def test_polygon_table_file(self, capsys, tmp_path):
        verts = [[2.0, 1.0], [-2.0, 1.0], [-2.0, -1.0], [2.0, -1.0]]
        path = write_json(tmp_path / "t.json", {"kind": "polygon", "vertices": verts})
        rc, rep, _ = run_json(capsys, ["abstime", "--in", path])
        assert rc == 0
        # parallelogram: same invariant time as the square
        assert rep["results"]["absolute_period"] == pytest.approx(math.sqrt(2.0))

    def test_support_table_file(self, capsys, tmp_path):
        theta = np.linspace(0.0, 2.0 * math.pi, 64, endpoint=False)
        values = (1.0 + 0.05 * np.cos(3.0 * theta)).tolist()
        path = write_json(tmp_path / "t.json", {"kind": "support", "values": values})
        rc, rep, _ = run_json(capsys, ["abstime", "--in", path])
        assert rc == 0
        assert rep["flags"]["kind"] == "smooth"
        lower, upper = rep["bounds"]["lower"], rep["bounds"]["upper"]
        assert lower <= rep["results"]["absolute_period"] <= upper


class TestOutputFormats:
    def test_csv_sweep(self, capsys):
        rc, out, _ = run_cli(capsys, ["ialpha-sweep", "--grid", "4", "--format", "csv"])
        assert rc == 0
        lines = out.strip().split("\n")
        assert lines[0] == "alpha,value,bound"
        assert len(lines) == 6
        first = [float(x) for x in lines[1].split(",")]
        assert first == pytest.approx([0.0, 0.0, 0.0], abs=1e-12)

    def test_csv_rejected_without_sweep(self, capsys):
        rc, _, err = run_cli(capsys, ["abstime", "--table", "square", "--format", "csv"])
        assert rc == 1
        assert "only available for sweeps" in err

    def test_out_writes_file(self, capsys, tmp_path):
        path = tmp_path / "report.json"
        rc, out, _ = run_cli(
            capsys, ["abstime", "--table", "circle", "--out", str(path)]
        )
        assert rc == 0
        assert out == ""
        rep = json.loads(path.read_text())
        assert rep["command"] == "abstime"

    def test_wall_time_on_stderr_only(self, capsys):
        rc, out, err = run_cli(capsys, ["abstime", "--table", "square"])
        assert rc == 0
        assert "wall time" in err
        assert "wall_time" not in out


class TestDeterminism:
    ARGV = ["bs-check", "--n", "5", "--trials", "10", "--seed", "99"]

    def test_repeat_runs_byte_identical(self, capsys):
        _, first, _ = run_cli(capsys, self.ARGV)
        _, second, _ = run_cli(capsys, self.ARGV)
        assert first == second

    def test_subprocess_matches_in_process(self, capsys):
        _, expected, _ = run_cli(capsys, self.ARGV)
        proc = subprocess.run(
            [sys.executable, "-m", "centroaffine.cli", *self.ARGV],
            capture_output=True, text=True, check=True,
        )
        assert proc.stdout == expected
