import json

import numpy as np
import pytest
from click.testing import CliRunner

from gkdv.cli import main
from gkdv.errors import ConfigError
from gkdv.runconfig import RunConfig


def write_config(tmp_path, name, payload):
    path = tmp_path / name
    path.write_text(json.dumps(payload))
    return str(path)


def solve_config(**overrides):
    cfg = {
        "symbol": {"name": "kdv-ks"},
        "grid": {"length": 100.0, "n_points": 256},
        "k": 1.0,
        "s": 0.0,
        "mode": "conservative",
        "seed": 11,
        "initial_data": {"type": "gaussian", "amplitude": 0.05, "width": 4.0},
        "output_times": [0.0005],
    }
    cfg.update(overrides)
    return cfg


def verify_config(**overrides):
    cfg = {
        "symbol": {"name": "pure-power", "p": 4.0},
        "grid": {"length": 100.0, "n_points": 256},
        "k": 1.0,
        "s": 0.0,
        "mode": "conservative",
        "seed": 3,
        "verify": {
            "theta_values": [1.0],
            "n_seeds": 3,
            "n_pairs": 1,
            "hy_exponents": [2.0],
            "xi_max": 8.0,
            "t_values": [0.001, 0.002, 0.004, 0.008],
            "n_times": 6,
        },
    }
    cfg.update(overrides)
    return cfg


class TestRunConfig:
    def test_round_trip_and_hash(self, tmp_path):
        path = write_config(tmp_path, "a.json", solve_config())
        cfg = RunConfig.from_file(path, "solve")
        again = RunConfig.from_dict(json.loads(cfg.canonical_json()), "solve")
        assert cfg.config_hash() == again.config_hash()

    def test_unknown_keys_rejected(self):
        with pytest.raises(ConfigError, match="unknown key"):
            RunConfig.from_dict(solve_config(bogus=1), "solve")
        bad_grid = solve_config()
        bad_grid["grid"] = {"length": 1.0, "n_points": 64, "oops": 2}
        with pytest.raises(ConfigError, match="grid"):
            RunConfig.from_dict(bad_grid, "solve")

    def test_seed_required(self):
        cfg = solve_config()
        del cfg["seed"]
        with pytest.raises(ConfigError, match="seed"):
            RunConfig.from_dict(cfg, "solve")

    def test_initial_data_required_for_solve(self):
        cfg = solve_config()
        del cfg["initial_data"]
        with pytest.raises(ConfigError):
            RunConfig.from_dict(cfg, "solve")

    def test_builders(self):
        cfg = RunConfig.from_dict(solve_config(), "solve")
        prob = cfg.build_problem()
        assert prob.grid.n_points == 256
        assert prob.symbol.name == "kdv-ks"
        assert prob.k == 1.0

    def test_tabulated_symbol_from_config(self):
        raw = verify_config()
        raw["symbol"] = {
            "name": "custom",
            "p": 3.0,
            "q": 1.0,
            "c_phi1": 2.0,
            "eta": 1.0,
            "table": [[0.0, 0.0], [1.0, 1.0], [10.0, 10.0]],
        }
        cfg = RunConfig.from_dict(raw, "verify")
        sym = cfg.build_symbol()
        assert sym.p == 3.0
        from gkdv.symbols import evaluate_phi

        assert evaluate_phi(sym, 2.0) == pytest.approx(-8.0 + 2.0)


class TestSolveCommand:
    def test_zero_data_success(self, tmp_path):
        cfg = solve_config(initial_data={"type": "zero"}, output_times=[0.5])
        path = write_config(tmp_path, "zero.json", cfg)
        runner = CliRunner()
        res = runner.invoke(main, ["solve", "--config", path, "--out", str(tmp_path / "out")])
        assert res.exit_code == 0
        run_dirs = list((tmp_path / "out").iterdir())
        assert len(run_dirs) == 1
        traj = (run_dirs[0] / "data" / "trajectory_000.csv").read_text().splitlines()
        assert traj[0] == "x,value"
        values = np.array([float(line.split(",")[1]) for line in traj[1:]])
        assert np.all(values == 0)

    def test_deterministic_outputs(self, tmp_path):
        path = write_config(tmp_path, "s.json", solve_config())
        runner = CliRunner()
        for sub in ("o1", "o2"):
            res = runner.invoke(main, ["solve", "--config", path, "--out", str(tmp_path / sub)])
            assert res.exit_code == 0
        manifests = [
            json.loads(next((tmp_path / sub).rglob("manifest.json")).read_text())
            for sub in ("o1", "o2")
        ]
        sums = [[f["sha256"] for f in m["files"]] for m in manifests]
        assert sums[0] == sums[1]

    def test_manifest_lists_all_files(self, tmp_path):
        path = write_config(tmp_path, "s.json", solve_config())
        runner = CliRunner()
        res = runner.invoke(main, ["solve", "--config", path, "--out", str(tmp_path / "out")])
        assert res.exit_code == 0
        run_dir = next((tmp_path / "out").iterdir())
        manifest = json.loads((run_dir / "manifest.json").read_text())
        listed = {f["path"] for f in manifest["files"]}
        on_disk = {
            str(p.relative_to(run_dir))
            for p in run_dir.rglob("*")
            if p.is_file() and p.name != "manifest.json"
        }
        assert listed == on_disk
        assert "reports/picard_trace.json" in listed

    def test_config_error_exit_2(self, tmp_path):
        path = write_config(tmp_path, "bad.json", solve_config(bogus=1))
        runner = CliRunner()
        res = runner.invoke(main, ["solve", "--config", path])
        assert res.exit_code == 2

    def test_malformed_json_exit_2(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{not json")
        runner = CliRunner()
        res = runner.invoke(main, ["solve", "--config", str(path)])
        assert res.exit_code == 2

    def test_solver_failure_exit_1(self, tmp_path):
        # kdv-burgers with k = 1 is outside the contraction range
        cfg = solve_config(symbol={"name": "kdv-burgers"})
        path = write_config(tmp_path, "inadmissible.json", cfg)
        runner = CliRunner()
        res = runner.invoke(main, ["solve", "--config", path, "--out", str(tmp_path / "out")])
        assert res.exit_code == 1

    def test_env_override(self, tmp_path, monkeypatch):
        monkeypatch.setenv("GKDV_OUT", str(tmp_path / "envout"))
        path = write_config(tmp_path, "s.json", solve_config())
        runner = CliRunner()
        res = runner.invoke(main, ["solve", "--config", path])
        assert res.exit_code == 0
        assert (tmp_path / "envout").exists()


class TestVerifyCommand:
    def test_linear_suite_passes(self, tmp_path):
        path = write_config(tmp_path, "v.json", verify_config())
        runner = CliRunner()
        res = runner.invoke(
            main, ["verify", "--config", path, "--suite", "linear", "--out", str(tmp_path / "out")]
        )
        assert res.exit_code == 0
        run_dir = next((tmp_path / "out").iterdir())
        reports = list((run_dir / "reports").glob("*.json"))
        assert len(reports) >= 3
        assert (run_dir / "reports" / "summary.txt").exists()

    def test_inadmissible_pair_skips_contraction(self, tmp_path):
        cfg = verify_config(symbol={"name": "kdv-burgers"})
        cfg["initial_data"] = {"type": "zero"}
        del cfg["initial_data"]  # verify config takes no initial_data section
        path = write_config(tmp_path, "v2.json", cfg)
        runner = CliRunner()
        res = runner.invoke(
            main,
            ["verify", "--config", path, "--suite", "nonlinear", "--out", str(tmp_path / "out")],
        )
        assert res.exit_code == 0
        run_dir = next((tmp_path / "out").iterdir())
        payloads = [json.loads(p.read_text()) for p in (run_dir / "reports").glob("*.json")]
        verdicts = {p["estimate_id"]: p["verdict"] for p in payloads}
        skipped = [v for key, v in verdicts.items() if key.startswith("contraction")]
        assert skipped == ["skipped"]

    def test_bad_suite_exit_2(self, tmp_path):
        cfg = verify_config(suite="everything")
        path = write_config(tmp_path, "v3.json", cfg)
        runner = CliRunner()
        res = runner.invoke(main, ["verify", "--config", path])
        assert res.exit_code == 2


class TestSweepCommand:
    def sweep_cfg(self):
        cfg = verify_config()
        cfg["sweep"] = {"k": [1.0], "p": [4.0]}
        cfg["suite"] = "linear"
        return cfg

    def test_single_point_matches_verify(self, tmp_path):
        runner = CliRunner()
        vpath = write_config(tmp_path, "v.json", verify_config())
        res_v = runner.invoke(
            main, ["verify", "--config", vpath, "--suite", "linear", "--out", str(tmp_path / "vo")]
        )
        assert res_v.exit_code == 0
        spath = write_config(tmp_path, "s.json", self.sweep_cfg())
        res_s = runner.invoke(main, ["sweep", "--config", spath, "--out", str(tmp_path / "so")])
        assert res_s.exit_code == 0
        run_dir = next((tmp_path / "so").iterdir())
        rows = (run_dir / "data" / "sweep.csv").read_text().splitlines()
        header, body = rows[0], rows[1:]
        assert header == "k,p,s,estimate_id,theoretical,fitted,verdict"
        vdir = next((tmp_path / "vo").iterdir())
        fitted_verify = {}
        for p in (vdir / "reports").glob("*.json"):
            payload = json.loads(p.read_text())
            fitted_verify[payload["estimate_id"]] = payload["fitted_exponent"]
        for line in body:
            parts = line.split(",")
            estimate_id, fitted = parts[3], parts[5]
            if fitted:
                assert float(fitted) == fitted_verify[estimate_id]

    def test_cartesian_counts(self, tmp_path):
        cfg = self.sweep_cfg()
        cfg["sweep"] = {"k": [1.0, 2.0], "p": [4.0, 5.0]}
        cfg["verify"]["theta_values"] = [1.0]
        path = write_config(tmp_path, "s2.json", cfg)
        runner = CliRunner()
        res = runner.invoke(main, ["sweep", "--config", path, "--out", str(tmp_path / "out")])
        assert res.exit_code == 0
        run_dir = next((tmp_path / "out").iterdir())
        rows = (run_dir / "data" / "sweep.csv").read_text().splitlines()[1:]
        combos = {tuple(r.split(",")[:3]) for r in rows}
        assert len(combos) == 4

    def test_parallel_jobs_match_serial(self, tmp_path):
        cfg = self.sweep_cfg()
        cfg["sweep"] = {"k": [1.0, 2.0]}
        path = write_config(tmp_path, "s3.json", cfg)
        runner = CliRunner()
        outputs = {}
        for label, jobs in (("serial", "1"), ("parallel", "2")):
            res = runner.invoke(
                main,
                ["sweep", "--config", path, "--jobs", jobs, "--out", str(tmp_path / label)],
            )
            assert res.exit_code == 0
            run_dir = next((tmp_path / label).iterdir())
            outputs[label] = (run_dir / "data" / "sweep.csv").read_text()
        assert outputs["serial"] == outputs["parallel"]
