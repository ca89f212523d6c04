import json

import numpy as np
import pytest

import weep.cli as cli
from weep.errors import SolverError
from weep.images import write_pgm
from weep.penalty import derive_weep_params, weep_grad, weep_prox, weep_value


def run_cli(args):
    return cli.main(args)


class TestPenaltyTable:
    def test_row_count_and_origin_row(self, tmp_path):
        out = tmp_path / "table.csv"
        code = run_cli(["penalty-table", "--a", "2", "--b", "0.5",
                        "--range", "-3", "3", "--step-size", "1",
                        "--lambda", "0.5", "--out", str(out)])
        assert code == 0
        lines = out.read_text().strip().split("\n")
        assert lines[0] == "x,h,weep,grad,prox"
        assert len(lines) == 1 + 7
        origin = dict(zip(lines[0].split(","), lines[4].split(",")))
        assert float(origin["x"]) == 0.0
        assert float(origin["h"]) == 0.0
        assert float(origin["weep"]) == 0.0
        assert float(origin["grad"]) == 0.0
        assert float(origin["prox"]) == 0.0

    def test_csv_round_trips_exactly(self, tmp_path):
        out = tmp_path / "table.csv"
        assert run_cli(["penalty-table", "--a", "3", "--b", "0.7",
                        "--range", "-2", "2", "--step-size", "0.25",
                        "--lambda", "0.3", "--out", str(out)]) == 0
        p = derive_weep_params(3.0, 0.7)
        lines = out.read_text().strip().split("\n")[1:]
        for line in lines:
            x, h, w, g, pr = (float(v) for v in line.split(","))
            assert w == weep_value(p, x)
            assert g == weep_grad(p, x)
            assert pr == weep_prox(p, 0.3, x)

    def test_domain_error_is_usage_exit(self, tmp_path):
        out = tmp_path / "t.csv"
        assert run_cli(["penalty-table", "--a", "-1", "--out", str(out)]) == 1
        assert not out.exists()
        assert run_cli(["penalty-table", "--lambda", "1.5", "--out", str(out)]) == 1
        assert not out.exists()


class TestDenoise1d:
    def test_single_route_invocation_writes_artifacts(self, tmp_path):
        code = run_cli(["denoise1d", "--penalty", "weep", "--solver", "lbfgs",
                        "--lambda", "0.8", "--a", "4", "--b", "0.05",
                        "--sigma", "0.3", "--seed", "7",
                        "--out-root", str(tmp_path)])
        assert code == 0
        run_dir = tmp_path / "denoise1d-seed7"
        report = json.loads((run_dir / "report.json").read_text())
        assert report["seed"] == 7 and report["sigma"] == 0.3
        assert len(report["reports"]) == 1
        entry = report["reports"][0]
        assert entry["method"] == "weep-tv" and entry["solver"] == "lbfgs"
        assert (run_dir / entry["trace_path"]).exists()

    def test_missing_sigma_is_usage_error_no_files(self, tmp_path):
        code = run_cli(["denoise1d", "--penalty", "l2",
                        "--out-root", str(tmp_path)])
        assert code == 1
        assert not (tmp_path / "denoise1d-seed0").exists()

    def test_unknown_flag_is_usage_error(self, tmp_path):
        assert run_cli(["denoise1d", "--sigma", "0.3", "--frobnicate", "1"]) == 1

    def test_lambda_with_all_penalties_rejected(self, tmp_path):
        assert run_cli(["denoise1d", "--sigma", "0.3", "--lambda", "0.5",
                        "--out-root", str(tmp_path)]) == 1

    def test_invalid_penalty_solver_combo_rejected(self, tmp_path):
        assert run_cli(["denoise1d", "--sigma", "0.3", "--penalty", "l1",
                        "--solver", "lbfgs", "--out-root", str(tmp_path)]) == 1

    def test_bad_penalty_params_rejected_before_run(self, tmp_path):
        code = run_cli(["denoise1d", "--sigma", "0.3", "--penalty", "weep",
                        "--a", "-4", "--out-root", str(tmp_path)])
        assert code == 1
        assert not (tmp_path / "denoise1d-seed0").exists()

    def test_failure_marker_on_numerical_error(self, tmp_path, monkeypatch):
        def explode(*a, **kw):
            raise SolverError("synthetic divergence at iteration 3")

        monkeypatch.setattr(cli, "run_denoise_1d", explode)
        code = run_cli(["denoise1d", "--sigma", "0.3", "--penalty", "l2",
                        "--seed", "4", "--out-root", str(tmp_path)])
        assert code == 3
        run_dir = tmp_path / "denoise1d-seed4"
        contents = [p.name for p in run_dir.iterdir()]
        assert contents == ["FAILED.txt"]
        assert "synthetic divergence" in (run_dir / "FAILED.txt").read_text()


class TestDenoise2d:
    def test_single_penalty_run(self, tmp_path):
        rng = np.random.default_rng(0)
        img = rng.integers(0, 256, size=(24, 24)).astype(float)
        path = tmp_path / "img.pgm"
        write_pgm(path, img)
        code = run_cli(["denoise2d", "--image", str(path), "--sigma", "10",
                        "--penalty", "l2", "--lambda", "0.4", "--seed", "2",
                        "--out-root", str(tmp_path)])
        assert code == 0
        report = json.loads((tmp_path / "denoise2d-seed2" / "report.json").read_text())
        assert report["reports"][0]["metrics"]["ssim"] <= 1.0

    def test_missing_image_is_io_error(self, tmp_path):
        code = run_cli(["denoise2d", "--image", str(tmp_path / "nope.pgm"),
                        "--sigma", "10", "--out-root", str(tmp_path)])
        assert code == 2


class TestRobustReg:
    def test_byte_identical_reruns(self, tmp_path):
        args = ["robust-reg", "--trials", "8", "--n", "40",
                "--outlier-frac", "0.6", "--seed", "1"]
        assert run_cli(args + ["--out-root", str(tmp_path / "r1")]) == 0
        assert run_cli(args + ["--out-root", str(tmp_path / "r2")]) == 0
        a = (tmp_path / "r1" / "robust-reg-seed1" / "summary.json").read_bytes()
        b = (tmp_path / "r2" / "robust-reg-seed1" / "summary.json").read_bytes()
        assert a == b

    def test_bad_losses_rejected(self, tmp_path):
        assert run_cli(["robust-reg", "--losses", "l2sq,scad",
                        "--out-root", str(tmp_path)]) == 1


class TestGridSearch:
    def test_singleton_grid_artifacts(self, tmp_path):
        code = run_cli(["grid-search", "--task", "denoise1d", "--sigma", "0.25",
                        "--penalty", "l2", "--lambda-grid", "0.7",
                        "--seed", "3", "--out-root", str(tmp_path)])
        assert code == 0
        run_dir = tmp_path / "grid-search-seed3"
        best = json.loads((run_dir / "best.json").read_text())
        assert best["best"] == {"lam": 0.7}
        table = (run_dir / "grid_table.csv").read_text().strip().split("\n")
        assert table[0] == "lam,psnr"
        assert len(table) == 2

    def test_ssim_on_1d_rejected(self, tmp_path):
        assert run_cli(["grid-search", "--task", "denoise1d", "--sigma", "0.2",
                        "--penalty", "l2", "--lambda-grid", "0.5",
                        "--metric", "ssim", "--out-root", str(tmp_path)]) == 1


class TestConfigFile:
    def test_config_supplies_required_flags(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"sigma": 0.3, "penalty": "l2", "seed": 5}))
        code = run_cli(["denoise1d", "--config", str(cfg),
                        "--out-root", str(tmp_path)])
        assert code == 0
        assert (tmp_path / "denoise1d-seed5" / "report.json").exists()

    def test_cli_flags_override_config(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"sigma": 0.3, "penalty": "l2", "seed": 5}))
        code = run_cli(["denoise1d", "--config", str(cfg), "--seed", "9",
                        "--out-root", str(tmp_path)])
        assert code == 0
        assert (tmp_path / "denoise1d-seed9").exists()
        assert not (tmp_path / "denoise1d-seed5").exists()

    def test_unknown_config_key_rejected(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"sigma": 0.3, "wavelength": 9}))
        assert run_cli(["denoise1d", "--config", str(cfg),
                        "--out-root", str(tmp_path)]) == 1

    def test_malformed_config_rejected(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        assert run_cli(["denoise1d", "--sigma", "0.3", "--config", str(bad)]) == 1
        arr = tmp_path / "arr.json"
        arr.write_text("[1, 2, 3]")
        assert run_cli(["denoise1d", "--sigma", "0.3", "--config", str(arr)]) == 1
        assert run_cli(["denoise1d", "--sigma", "0.3",
                        "--config", str(tmp_path / "nope.json")]) == 1

    def test_bad_grid_values_rejected(self, tmp_path):
        assert run_cli(["grid-search", "--task", "denoise1d", "--sigma", "0.2",
                        "--penalty", "l2", "--lambda-grid", "a,b",
                        "--out-root", str(tmp_path)]) == 1
        assert run_cli(["grid-search", "--task", "denoise1d", "--sigma", "0.2",
                        "--penalty", "l2", "--lambda-grid", ",",
                        "--out-root", str(tmp_path)]) == 1

    def test_env_var_out_root(self, tmp_path, monkeypatch):
        monkeypatch.setenv("WEEP_OUT_ROOT", str(tmp_path / "envroot"))
        code = run_cli(["denoise1d", "--sigma", "0.3", "--penalty", "l2",
                        "--seed", "6"])
        assert code == 0
        assert (tmp_path / "envroot" / "denoise1d-seed6" / "report.json").exists()


class TestHelp:
    @pytest.mark.parametrize("cmd", ["penalty-table", "denoise1d", "denoise2d",
                                     "robust-reg", "grid-search"])
    def test_help_lists_flags_with_defaults(self, cmd, capsys):
        with pytest.raises(SystemExit) as exc:
            run_cli([cmd, "--help"])
        assert exc.value.code == 0
        text = capsys.readouterr().out
        assert "default" in text
        assert "exit codes" in text


class TestConsoleScript:
    def test_installed_entry_point(self, tmp_path):
        import subprocess
        import sys

        out = tmp_path / "t.csv"
        proc = subprocess.run(
            [sys.executable, "-m", "weep.cli", "penalty-table", "--a", "2",
             "--b", "0", "--range", "-1", "1", "--step-size", "0.5",
             "--out", str(out)],
            capture_output=True, text=True,
        )
        assert proc.returncode == 0, proc.stderr
        assert out.exists()
        assert len(out.read_text().strip().split("\n")) == 6

    def test_usage_error_exit_code_from_subprocess(self):
        import subprocess
        import sys

        proc = subprocess.run(
            [sys.executable, "-m", "weep.cli", "denoise1d"],
            capture_output=True, text=True,
        )
        assert proc.returncode == 1
        assert "usage error" in proc.stderr
