import json
import math
import os
import subprocess
import sys

import numpy as np
import pytest

from radial.cli import main


def run_cli(args, capsys):
    code = main(args)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestEval:
    def test_cap_value_line(self, capsys):
        code, out, _ = run_cli(["eval", "--f", "pos(sqrt(1-x0^2))", "--dim", "1", "--at", "1"], capsys)
        assert code == 0
        line = out.splitlines()[0]
        value = float(line.split("±")[0])
        assert abs(value - math.sqrt(2.0)) <= 1e-9
        assert line.endswith("± 1e-10")
        assert "bracket [" in out.splitlines()[1]

    def test_zero_tag(self, capsys):
        code, out, _ = run_cli(["eval", "--f", "abs(x0)", "--dim", "1", "--at", "2", "--sense", "upper"], capsys)
        assert code == 0
        assert out.splitlines()[0] == "0"

    def test_infinity_tag(self, capsys):
        code, out, _ = run_cli(["eval", "--f", "abs(x0)", "--dim", "1", "--at", "0.5"], capsys)
        assert code == 0
        assert out.splitlines()[0] == "inf"

    def test_parse_error_exit_2(self, capsys):
        code, _, err = run_cli(["eval", "--f", "max(", "--dim", "1", "--at", "1"], capsys)
        assert code == 2
        assert "offset 4" in err

    def test_nonmonotone_exit_3_with_hint(self, capsys):
        code, _, err = run_cli(["eval", "--f", "(x0+1)^2 + 0.5", "--dim", "1", "--at", "-3"], capsys)
        assert code == 3
        assert "--global" in err

    def test_global_scan_flag(self, capsys):
        code, out, _ = run_cli(
            ["eval", "--f", "(x0+1)^2 + 0.5", "--dim", "1", "--at", "-1", "--global"], capsys
        )
        assert code == 0
        value = float(out.splitlines()[0].split("±")[0])
        assert abs(value - (1.0 + 1.0 / math.sqrt(3.0))) <= 1e-6

    def test_lower_sense(self, capsys):
        code, out, _ = run_cli(["eval", "--f", "abs(x0)", "--dim", "1", "--at", "1", "--sense", "lower"], capsys)
        assert code == 0
        assert out.splitlines()[0] == "0"

    def test_tol_flag_changes_display(self, capsys):
        code, out, _ = run_cli(
            ["--tol", "1e-6", "eval", "--f", "pos(sqrt(1-x0^2))", "--dim", "1", "--at", "1"], capsys
        )
        assert code == 0
        assert out.splitlines()[0].endswith("± 1e-06")


class TestGrid:
    def test_deterministic_and_residual_small_inside_cap(self, capsys, tmp_path):
        out1 = tmp_path / "a.csv"
        out2 = tmp_path / "b.csv"
        args = ["grid", "--f", "pos(sqrt(1-x0^2))", "--dim", "1", "--grid=-3:3:601", "--out"]
        assert run_cli(args + [str(out1)], capsys)[0] == 0
        assert run_cli(args + [str(out2)], capsys)[0] == 0
        b1, b2 = out1.read_bytes(), out2.read_bytes()
        assert b1 == b2  # byte-identical reruns
        lines = b1.decode().splitlines()
        header = lines[0].split(",")
        assert header == ["x0", "f", "upper", "lower", "bidual", "residual"]
        worst = 0.0
        for line in lines[1:]:
            cells = dict(zip(header, line.split(",")))
            x = float(cells["x0"])
            if abs(x) < 1.0:
                worst = max(worst, float(cells["residual"]))
                assert abs(float(cells["upper"]) - math.sqrt(1 + x * x)) <= 1e-9
        assert worst <= 5e-10

    def test_quadratic_residual_visible_with_global(self, capsys, tmp_path):
        out = tmp_path / "quad.csv"
        code, _, _ = run_cli(
            [
                "grid", "--f", "(x0+1)^2 + 0.5", "--dim", "1",
                "--grid=-3:1:21", "--out", str(out),
                "--emit", "primal,bidual,residual", "--global",
            ],
            capsys,
        )
        assert code == 0
        lines = out.read_text().splitlines()
        header = lines[0].split(",")
        residuals = [float(dict(zip(header, l.split(",")))["residual"]) for l in lines[1:]]
        assert max(residuals) > 0.1

    def test_gamma_curve_emission(self, capsys, tmp_path):
        # Point cloud of the transformed graph of a sine wave at height 2.
        out = tmp_path / "sine.csv"
        code, _, _ = run_cli(
            [
                "grid", "--f", "2 + sin(x0)", "--dim", "1",
                "--grid=-6:6:41", "--out", str(out), "--emit", "primal,gamma",
            ],
            capsys,
        )
        assert code == 0
        lines = out.read_text().splitlines()
        assert lines[0].split(",") == ["x0", "f", "gamma_y0", "gamma_v"]
        for line in lines[1:]:
            x, fx, gy, gv = (float(t) for t in line.split(","))
            assert abs(fx - (2 + math.sin(x))) <= 1e-12
            assert abs(gy - x / fx) <= 1e-12
            assert abs(gv - 1 / fx) <= 1e-12

    def test_json_format(self, capsys, tmp_path):
        out = tmp_path / "grid.json"
        code, _, _ = run_cli(
            ["grid", "--f", "abs(x0)", "--dim", "1", "--grid=0.5:2:4", "--out", str(out), "--emit", "dual", "--format", "json"],
            capsys,
        )
        assert code == 0
        doc = json.loads(out.read_text())
        assert doc["schema"] == "radial/v1"
        assert doc["columns"] == ["x0", "upper"]
        assert doc["rows"][0] == [0.5, "inf"]
        assert doc["rows"][-1] == [2.0, 0]

    def test_grid_spec_validation(self, capsys, tmp_path):
        with pytest.raises(SystemExit) as exc:
            run_cli(["grid", "--f", "abs(x0)", "--dim", "1", "--grid=1:2:1", "--out", str(tmp_path / "x")], capsys)
        assert exc.value.code == 2

    def test_two_d_grid(self, capsys, tmp_path):
        out = tmp_path / "g2.csv"
        code, _, _ = run_cli(
            [
                "grid", "--f", "pos(sqrt(1 - norm(x0,x1)^2))", "--dim", "2",
                "--grid=-0.5:0.5:3,-0.5:0.5:3", "--out", str(out), "--emit", "primal,dual",
            ],
            capsys,
        )
        assert code == 0
        lines = out.read_text().splitlines()
        assert lines[0].split(",") == ["x0", "x1", "f", "upper"]
        assert len(lines) == 10
        first = [float(t) for t in lines[1].split(",")]
        assert first[:2] == [-0.5, -0.5]
        assert abs(first[3] - math.sqrt(1.5)) <= 1e-9


class TestSetTransform:
    def test_ellipsoid_instance(self, capsys, tmp_path):
        src = tmp_path / "in.json"
        dst = tmp_path / "out.json"
        src.write_text(
            json.dumps(
                {
                    "schema": "radial/v1",
                    "type": "ellipsoid",
                    "center": {"x": [0.0], "u": 2.0},
                    "shape": [[1.0, 0.0], [0.0, 1.0]],
                }
            )
        )
        code, _, _ = run_cli(["set-transform", "--in", str(src), "--out", str(dst)], capsys)
        assert code == 0
        doc = json.loads(dst.read_text())
        assert doc["type"] == "ellipsoid"
        assert abs(doc["center"]["u"] - 2.0 / 3.0) <= 1e-12
        shape = np.array(doc["shape"])
        assert np.max(np.abs(shape - np.diag([3.0, 9.0]))) <= 1e-12

    def test_horizontal_halfspace_reverses(self, capsys, tmp_path):
        src = tmp_path / "h.json"
        dst = tmp_path / "ht.json"
        src.write_text(
            json.dumps(
                {
                    "schema": "radial/v1",
                    "type": "halfspace",
                    "normal_x": [0.0],
                    "normal_u": 1.0,
                    "anchor": {"x": [0.0], "u": 1.0},
                }
            )
        )
        code, _, _ = run_cli(["set-transform", "--in", str(src), "--out", str(dst)], capsys)
        assert code == 0
        doc = json.loads(dst.read_text())
        assert doc["normal_u"] == -1.0 and doc["normal_x"] == [0.0]

    def test_square_polyhedron(self, capsys, tmp_path):
        def hs(nx, nu, x, u):
            return {"schema": "radial/v1", "type": "halfspace", "normal_x": [nx], "normal_u": nu, "anchor": {"x": [x], "u": u}}

        src = tmp_path / "p.json"
        dst = tmp_path / "pt.json"
        src.write_text(
            json.dumps(
                {
                    "schema": "radial/v1",
                    "type": "polyhedron",
                    "halfspaces": [hs(1, 0, 1, 2), hs(-1, 0, -1, 2), hs(0, 1, 0, 3), hs(0, -1, 0, 1)],
                }
            )
        )
        code, _, _ = run_cli(["set-transform", "--in", str(src), "--out", str(dst)], capsys)
        assert code == 0
        doc = json.loads(dst.read_text())
        assert doc["type"] == "polyhedron" and len(doc["halfspaces"]) == 4

    def test_schema_violation_exit_2(self, capsys, tmp_path):
        src = tmp_path / "bad.json"
        src.write_text(json.dumps({"type": "halfspace"}))
        code, _, err = run_cli(["set-transform", "--in", str(src), "--out", str(tmp_path / "o.json")], capsys)
        assert code == 2 and "schema" in err

    def test_containment_violation_exit_2(self, capsys, tmp_path):
        src = tmp_path / "low.json"
        src.write_text(
            json.dumps(
                {
                    "schema": "radial/v1",
                    "type": "ellipsoid",
                    "center": {"x": [0.0], "u": 0.9},
                    "shape": [[1.0, 0.0], [0.0, 1.0]],
                }
            )
        )
        code, _, err = run_cli(["set-transform", "--in", str(src), "--out", str(tmp_path / "o.json")], capsys)
        assert code == 2 and "contained" in err


class TestCheck:
    def test_strictly_radial_exit_0(self, capsys):
        code, out, _ = run_cli(["check", "--f", "pos(sqrt(1-x0^2))", "--dim", "1", "--rays", "16", "--points", "32"], capsys)
        assert code == 0 and "strictly radial (sampled)" in out

    def test_quadratic_exit_1_with_witness(self, capsys):
        code, out, _ = run_cli(["check", "--f", "(x0+1)^2 + 0.5", "--dim", "1", "--rays", "16", "--points", "32"], capsys)
        assert code == 1 and "witness" in out

    def test_bump_exit_0(self, capsys):
        code, out, _ = run_cli(["check", "--f", "exp(-abs(x0)) + 0.5", "--dim", "1", "--rays", "16", "--points", "32"], capsys)
        assert code == 0

    def test_absval_not_strict(self, capsys):
        code, out, _ = run_cli(["check", "--f", "abs(x0)", "--dim", "1", "--rays", "16", "--points", "32"], capsys)
        assert code == 0 and "not strict" in out

    def test_indicator_inconclusive_exit_4(self, capsys):
        code, out, _ = run_cli(["check", "--f", "indicator(ball 1)", "--dim", "1", "--rays", "4", "--points", "16"], capsys)
        assert code == 4 and "inconclusive" in out


class TestSolve:
    def test_parabola_json(self, capsys):
        code, out, _ = run_cli(["solve", "--f", "pos(2 - (x0-1)^2)", "--dim", "1", "--y0", "5"], capsys)
        assert code == 0
        doc = json.loads(out)
        assert abs(doc["x_star"][0] - 1.0) <= 1e-5
        assert abs(doc["p_star"] - 2.0) <= 1e-5
        assert doc["iterations"] >= 1 and doc["converged"]

    def test_quadratic_exit_3(self, capsys):
        code, _, err = run_cli(["solve", "--f", "(x0+1)^2 + 0.5", "--dim", "1", "--y0", "1"], capsys)
        assert code == 3 and "radial" in err.lower()

    def test_budget_exhaustion_exit_5_with_partial_result(self, capsys):
        code, out, err = run_cli(
            ["solve", "--f", "pos(2 - (x0-1)^2)", "--dim", "1", "--y0", "5", "--budget", "2"], capsys
        )
        assert code == 5
        doc = json.loads(out)  # partial result still printed
        assert doc["status"] == "budget" and not doc["converged"]

    def test_ball_constraint(self, capsys, tmp_path):
        cpath = tmp_path / "ball.json"
        cpath.write_text(json.dumps({"schema": "radial/v1", "type": "ball", "dim": 1, "radius": 0.5}))
        code, out, _ = run_cli(
            ["solve", "--f", "pos(2 - (x0-1)^2)", "--dim", "1", "--y0", "2", "--constraint", str(cpath)], capsys
        )
        assert code == 0
        doc = json.loads(out)
        assert abs(doc["x_star"][0] - 0.5) <= 1e-3

    def test_constraint_schema_error_exit_2(self, capsys, tmp_path):
        cpath = tmp_path / "bad.json"
        cpath.write_text(json.dumps({"schema": "radial/v1", "type": "cone"}))
        code, _, err = run_cli(
            ["solve", "--f", "pos(2 - (x0-1)^2)", "--dim", "1", "--y0", "2", "--constraint", str(cpath)], capsys
        )
        assert code == 2


class TestEntryPointAndEnvironment:
    def test_console_entry_point_subprocess(self):
        proc = subprocess.run(
            [sys.executable, "-m", "radial.cli", "eval", "--f", "pos(sqrt(1-x0^2))", "--dim", "1", "--at", "0"],
            capture_output=True,
            text=True,
        )
        assert proc.returncode == 0
        assert proc.stdout.splitlines()[0].startswith("1.0000000000")

    def test_radial_tol_env_override(self):
        env = dict(os.environ, RADIAL_TOL="1e-6")
        proc = subprocess.run(
            [sys.executable, "-m", "radial.cli", "eval", "--f", "pos(sqrt(1-x0^2))", "--dim", "1", "--at", "1"],
            capture_output=True,
            text=True,
            env=env,
        )
        assert proc.returncode == 0
        assert proc.stdout.splitlines()[0].endswith("± 1e-06")

    def test_flag_overrides_env(self):
        env = dict(os.environ, RADIAL_TOL="1e-4")
        proc = subprocess.run(
            [
                sys.executable, "-m", "radial.cli", "--tol", "1e-8",
                "eval", "--f", "pos(sqrt(1-x0^2))", "--dim", "1", "--at", "1",
            ],
            capture_output=True,
            text=True,
            env=env,
        )
        assert proc.returncode == 0
        assert proc.stdout.splitlines()[0].endswith("± 1e-08")

    def test_bad_env_value(self):
        env = dict(os.environ, RADIAL_TOL="banana")
        proc = subprocess.run(
            [sys.executable, "-m", "radial.cli", "eval", "--f", "abs(x0)", "--dim", "1", "--at", "1"],
            capture_output=True,
            text=True,
            env=env,
        )
        assert proc.returncode == 2
