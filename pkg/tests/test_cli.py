import json
import math

import pytest

from sbskit import cli


def run_cli(args):
    return cli.main(args)


class TestConfig:
    def test_unknown_field_named(self, tmp_path):
        cfg = tmp_path / "bad.json"
        cfg.write_text(json.dumps({"fig2": {"n_valuez": [3]}}))
        with pytest.raises(cli.ConfigError, match="fig2.n_valuez"):
            cli.load_config(str(cfg))

    def test_unknown_scenario_is_config_error(self, tmp_path):
        assert run_cli(["--scenario", "fig3", "--out-dir", str(tmp_path)]) == cli.EXIT_CONFIG

    def test_missing_file(self):
        with pytest.raises(cli.ConfigError, match="not found"):
            cli.load_config("/nonexistent/config.json")

    def test_invalid_json(self, tmp_path):
        cfg = tmp_path / "broken.json"
        cfg.write_text("{not json")
        with pytest.raises(cli.ConfigError, match="valid JSON"):
            cli.load_config(str(cfg))

    def test_bad_measure_reported(self, tmp_path):
        cfg = tmp_path / "m.json"
        cfg.write_text(json.dumps({"measure": {"coupling": [2.0, 1.0]}}))
        out = tmp_path / "out"
        assert run_cli(["--scenario", "timescales", "--config", str(cfg), "--out-dir", str(out)]) == cli.EXIT_CONFIG

    def test_override_merging(self, tmp_path):
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps({"seed": 5, "fig2": {"t_points": 11}}))
        merged = cli.load_config(str(cfg))
        assert merged["seed"] == 5
        assert merged["fig2"]["t_points"] == 11
        assert merged["fig2"]["t_max"] == cli.DEFAULT_CONFIG["fig2"]["t_max"]


class TestFloatFormat:
    def test_round_trip_17_digits(self):
        for x in (1 / 3, math.pi, 1e-17, 0.8311290681345551, 2.0):
            assert float(cli.format_float(x)) == x


class TestTimescalesScenario:
    def test_output_values(self, tmp_path):
        assert run_cli(["--scenario", "timescales", "--out-dir", str(tmp_path)]) == 0
        lines = (tmp_path / "timescales.csv").read_text().splitlines()
        assert lines[0] == "N_m,N,f,g2bar,t_B,t_D,ratio_sq,B_at_tB,gamma2_at_tD"
        first = lines[1].split(",")
        assert first[0] == "100" and first[1] == "200"
        assert float(first[4]) == pytest.approx(0.8311290681345551, abs=1e-12)
        assert float(first[6]) == pytest.approx(4.0, abs=1e-12)
        assert float(first[7]) == pytest.approx(0.01, abs=1e-12)  # 1 / N_m

    def test_manifest_round_trip(self, tmp_path):
        run_cli(["--scenario", "timescales", "--out-dir", str(tmp_path), "--seed", "77"])
        manifest = json.loads((tmp_path / "manifest.json").read_text())
        assert manifest["scenario"] == "timescales"
        assert manifest["seed"] == 77
        assert manifest["outputs"] == ["timescales.csv"]
        assert manifest["config"]["seed"] == 77
        assert manifest["exit_status"] == 0


class TestFig2Scenario:
    def small_config(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(
            json.dumps(
                {"samples": 20, "fig2": {"n_values": [10, 25], "t_points": 21, "t_max": 1.0}}
            )
        )
        return cfg

    def test_outputs_and_shape(self, tmp_path):
        cfg = self.small_config(tmp_path)
        out = tmp_path / "out"
        assert run_cli(["--scenario", "fig2", "--config", str(cfg), "--out-dir", str(out)]) == 0
        for n in (10, 25):
            lines = (out / f"fig2_curve_n{n}.csv").read_text().splitlines()
            assert lines[0] == "t,mean_bound,stderr"
            assert len(lines) == 22
            first = lines[1].split(",")
            assert float(first[0]) == 0.0
            assert float(first[1]) == 2.0

    def test_byte_identical_rerun(self, tmp_path):
        cfg = self.small_config(tmp_path)
        out_a, out_b = tmp_path / "a", tmp_path / "b"
        run_cli(["--scenario", "fig2", "--config", str(cfg), "--out-dir", str(out_a)])
        run_cli(["--scenario", "fig2", "--config", str(cfg), "--out-dir", str(out_b)])
        for n in (10, 25):
            name = f"fig2_curve_n{n}.csv"
            assert (out_a / name).read_bytes() == (out_b / name).read_bytes()

    def test_seed_changes_output(self, tmp_path):
        cfg = self.small_config(tmp_path)
        out_a, out_b = tmp_path / "a", tmp_path / "b"
        run_cli(["--scenario", "fig2", "--config", str(cfg), "--out-dir", str(out_a)])
        run_cli(["--scenario", "fig2", "--config", str(cfg), "--out-dir", str(out_b), "--seed", "1"])
        assert (out_a / "fig2_curve_n10.csv").read_bytes() != (out_b / "fig2_curve_n10.csv").read_bytes()


class TestDiscriminationScenario:
    def test_bounds_hold_on_output(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"discrimination": {"n_mac": 21, "t_points": 6, "draws": 40}}))
        out = tmp_path / "out"
        assert run_cli(["--scenario", "discrimination", "--config", str(cfg), "--out-dir", str(out)]) == 0
        lines = (out / "discrimination.csv").read_text().splitlines()
        header = lines[0].split(",")
        assert header[:7] == ["t", "p_bar", "S_bar", "p_tilde_exact", "chernoff_lb", "K", "fuchs_limit"]
        for line in lines[1:]:
            row = dict(zip(header, map(float, line.split(","))))
            assert row["p_tilde_exact"] >= row["chernoff_lb"] - 1e-12
            assert row["ok_fraction"] == 1.0


class TestFig1Scenario:
    def test_small_grid_with_gate(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(
            json.dumps(
                {
                    "fig1": {
                        "lambda_grid": [0.5, 1.0],
                        "beta_grid": [0.0, 1.5707963267948966],
                        "n_spins": 30,
                        "tau": 60.0,
                        "tau_points": 12001,
                        "samples": 4,
                    }
                }
            )
        )
        out = tmp_path / "out"
        assert run_cli(["--scenario", "fig1", "--config", str(cfg), "--out-dir", str(out)]) == 0
        lines = (out / "fig1_surface.csv").read_text().splitlines()
        assert lines[0] == "lambda_plus,beta,mean_B,mean_abs_gamma,stderr_B,stderr_gamma"
        rows = [list(map(float, l.split(","))) for l in lines[1:]]
        assert len(rows) == 4
        by_node = {(r[0], r[1]): r for r in rows}
        assert by_node[(0.5, 0.0)][2] == 1.0  # <B> on the lam = 1/2 ridge
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["gates"]["quadrature_rel_change"] < 1e-3


class TestConvergenceGate:
    def test_coarse_quadrature_trips_exit_3(self, tmp_path):
        # 51 points over tau = 200 cannot resolve the early decay at (1, pi/2)
        cfg = tmp_path / "cfg.json"
        cfg.write_text(
            json.dumps(
                {
                    "fig1": {
                        "lambda_grid": [1.0],
                        "beta_grid": [1.5707963267948966],
                        "n_spins": 40,
                        "tau": 200.0,
                        "tau_points": 51,
                        "samples": 2,
                    }
                }
            )
        )
        out = tmp_path / "out"
        status = run_cli(["--scenario", "fig1", "--config", str(cfg), "--out-dir", str(out)])
        assert status == cli.EXIT_GATE
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["gates"]["quadrature_rel_change"] >= 1e-3
        assert manifest["exit_status"] == cli.EXIT_GATE


class TestVerifyScenario:
    def test_report_structure(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"verify": {"instances": 30}}))
        out = tmp_path / "out"
        status = run_cli(["--scenario", "verify", "--config", str(cfg), "--out-dir", str(out)])
        report = json.loads((out / "verify.json").read_text())
        assert set(report) == {"suites", "all_passed", "failed_suites"}
        assert "convention_certification" in report["suites"]
        for suite in report["suites"].values():
            assert suite["checks"] > 0
        # the additive-bound suite is the only one allowed to fail; exit code
        # must track the report
        assert status == (cli.EXIT_OK if report["all_passed"] else cli.EXIT_VERIFY)
        assert set(report["failed_suites"]) <= {"prop1_as_stated"}
