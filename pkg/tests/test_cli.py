"""CLI contract: CSV schemas, manifests, determinism, exit codes, plots."""

import json
import math

import pytest

from cfglab.cli import main

THEORY_HEADER = "t,mean_coeff,variance,delta_mu,delta_sigma2,phase"
SIM_HEADER = "t,delta_mu_hat,delta_mu_se,delta_sigma2_hat,delta_sigma2_se,n_samples"


def _read(path):
    with open(path) as fh:
        return fh.read()


def _rows(path):
    text = _read(path).strip().split("\n")
    return text[0], [line.split(",") for line in text[1:]]


class TestTheoryCommand:
    def test_mixture_zero_guidance_all_zero_deltas(self, tmp_path):
        out = tmp_path / "m.csv"
        rc = main(["--out-dir", str(tmp_path), "theory", "mixture", "--sigma2", "0.5",
                   "--beta", "0.1", "--w", "0", "--t", "0,0.5,1.5", "--out", "m.csv"])
        assert rc == 0
        header, rows = _rows(out)
        assert header == THEORY_HEADER
        assert len(rows) == 3
        for row in rows:
            assert abs(float(row[3])) < 1e-9 and abs(float(row[4])) < 1e-9

    def test_mixture_guided_only_reference_values(self, tmp_path):
        rc = main(["--out-dir", str(tmp_path), "theory", "mixture", "--sigma2", "0.5",
                   "--beta", "100", "--w", "1", "--t", "0", "--out", "m.csv"])
        assert rc == 0
        _, rows = _rows(tmp_path / "m.csv")
        assert float(rows[0][3]) == pytest.approx(0.333333, abs=1e-6)
        assert float(rows[0][4]) == pytest.approx(-0.518519, abs=1e-6)
        assert rows[0][5] == "guided"

    def test_joint_reference_values(self, tmp_path):
        rc = main(["--out-dir", str(tmp_path), "theory", "joint", "--r", "1",
                   "--s", "0.6", "--w", "1", "--t", "0", "--out", "j.csv"])
        assert rc == 0
        _, rows = _rows(tmp_path / "j.csv")
        assert float(rows[0][1]) == pytest.approx(1.6, abs=1e-9)
        assert float(rows[0][2]) == pytest.approx(0.653333, abs=1e-6)

    def test_ramped_schedule_path(self, tmp_path):
        rc = main(["--out-dir", str(tmp_path), "theory", "mixture", "--sigma2", "0.25",
                   "--beta", "100", "--w0", "-0.75", "--omega", "1", "--t", "0",
                   "--out", "ramp.csv"])
        assert rc == 0
        _, rows = _rows(tmp_path / "ramp.csv")
        assert float(rows[0][3]) == pytest.approx(0.25, abs=1e-8)
        assert float(rows[0][4]) == pytest.approx(1.0 / 6.0, abs=1e-8)


class TestManifests:
    def test_written_alongside_output(self, tmp_path):
        main(["--seed", "3", "--out-dir", str(tmp_path), "theory", "joint",
              "--r", "1", "--s", "0.6", "--w", "0.5", "--out", "j.csv"])
        manifest = json.loads(_read(tmp_path / "j.csv.manifest.json"))
        assert manifest["subcommand"] == "theory joint"
        assert manifest["seed"] == 3
        assert manifest["outputs"] == ["j.csv"]
        assert "duration_s" in manifest and manifest["parameters"]["s"] == 0.6

    def test_replay_from_manifest_parameters(self, tmp_path):
        argv = ["--seed", "5", "--out-dir", str(tmp_path / "a"), "theory", "mixture",
                "--sigma2", "0.4", "--beta", "0.2", "--w", "0.8", "--t", "0,1",
                "--out", "m.csv"]
        main(argv)
        params = json.loads(_read(tmp_path / "a" / "m.csv.manifest.json"))["parameters"]
        replay = ["--seed", str(params["seed"]), "--out-dir", str(tmp_path / "b"),
                  "theory", "mixture", "--sigma2", str(params["sigma2"]),
                  "--beta", str(params["beta"]), "--w", str(params["w"]),
                  "--t", params["t"], "--out", params["out"]]
        main(replay)
        assert _read(tmp_path / "a" / "m.csv") == _read(tmp_path / "b" / "m.csv")


class TestSimulateCommand:
    def test_deterministic_and_seed_sensitivity(self, tmp_path):
        base = ["simulate", "mixture", "--d", "6", "--beta", "0.4", "--sigma2", "0.5",
                "--w", "0.7", "--n", "2000", "--steps", "80", "--out", "s.csv"]
        main(["--seed", "7", "--out-dir", str(tmp_path / "r1")] + base)
        main(["--seed", "7", "--out-dir", str(tmp_path / "r2")] + base)
        main(["--seed", "8", "--out-dir", str(tmp_path / "r3")] + base)
        a, b = _read(tmp_path / "r1" / "s.csv"), _read(tmp_path / "r2" / "s.csv")
        assert a == b
        _, rows_a = _rows(tmp_path / "r1" / "s.csv")
        _, rows_c = _rows(tmp_path / "r3" / "s.csv")
        assert rows_a != rows_c
        # different seeds agree statistically: combined three-standard-error gate
        for col in (1, 3):
            va, sa = float(rows_a[0][col]), float(rows_a[0][col + 1])
            vc, sc = float(rows_c[0][col]), float(rows_c[0][col + 1])
            assert abs(va - vc) <= 3.0 * math.hypot(sa, sc)

    def test_header_and_dump_samples(self, tmp_path):
        rc = main(["--seed", "1", "--out-dir", str(tmp_path), "simulate", "mixture",
                   "--d", "3", "--beta", "0.3", "--sigma2", "0.5", "--w", "0", "--n", "50",
                   "--steps", "20", "--dump-samples", "--out", "s.csv"])
        assert rc == 0
        header, rows = _rows(tmp_path / "s.csv")
        assert header == SIM_HEADER
        assert rows[0][5] == "50"
        dump_header, dump_rows = _rows(tmp_path / "s_samples_t0.csv")
        assert dump_header == "x_1,x_2,x_3"
        assert len(dump_rows) == 50

    def test_joint_comparison_table(self, tmp_path):
        rc = main(["--seed", "2", "--out-dir", str(tmp_path), "simulate", "joint",
                   "--d2", "4", "--w", "1", "--n", "4000", "--steps", "400",
                   "--out", "j.csv"])
        assert rc == 0
        header, rows = _rows(tmp_path / "j.csv")
        assert header == "eig_index,mean_theory,mean_sim,mean_se,var_eig_theory,var_eig_sim"
        assert len(rows) == 4
        for row in rows:
            assert float(row[5]) == pytest.approx(float(row[4]), rel=0.2)


class TestSweepCommand:
    def test_minimal_grid_shape(self, tmp_path):
        rc = main(["--out-dir", str(tmp_path), "sweep", "beta-w", "--sigma2", "0.5",
                   "--beta-points", "2", "--w-points", "2", "--out", "g.csv"])
        assert rc == 0
        header, rows = _rows(tmp_path / "g.csv")
        assert header == "beta,w,t_speciation,delta_mu,delta_sigma2,region_label,error"
        assert len(rows) == 4

    def test_absent_switch_time_is_empty_field(self, tmp_path):
        main(["--out-dir", str(tmp_path), "sweep", "beta-w", "--sigma2", "0.5",
              "--beta-min", "1.1", "--beta-max", "1.3", "--beta-points", "2",
              "--w-min", "0.8", "--w-max", "1.0", "--w-points", "2", "--out", "g.csv"])
        _, rows = _rows(tmp_path / "g.csv")
        assert any(row[2] == "" for row in rows)

    def test_plot_script_golden(self, tmp_path):
        main(["--out-dir", str(tmp_path), "--emit-plot", "sweep", "schedule",
              "--sigma2", "0.75", "--w0-points", "2", "--omega-points", "2",
              "--out", "ps.csv"])
        script = _read(tmp_path / "ps.gp")
        assert script == (
            "# gnuplot heatmap for ps.csv\n"
            "# usage: gnuplot ps.gp\n"
            "set datafile separator comma\n"
            "set terminal pngcairo size 900,700\n"
            "set output 'ps.png'\n"
            "set key off\n"
            "set view map\n"
            "set xlabel 'w0'\n"
            "set ylabel 'omega'\n"
            "set title 'sweep schedule'\n"
            "splot 'ps.csv' every ::1 using 1:2:4 with points pt 5 ps 2 palette\n"
        )

    def test_byte_identical_reruns(self, tmp_path):
        argv = ["sweep", "joint-schedule", "--r", "1", "--s", "0.6",
                "--w0-points", "3", "--omega-points", "3", "--out", "g.csv"]
        main(["--out-dir", str(tmp_path / "x")] + argv)
        main(["--out-dir", str(tmp_path / "y")] + argv)
        assert _read(tmp_path / "x" / "g.csv") == _read(tmp_path / "y" / "g.csv")


class TestConfigPrecedence:
    def test_config_supplies_defaults_flags_override(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"seed": 11, "out_dir": str(tmp_path / "from_config")}))
        main(["--config", str(cfg), "theory", "joint", "--r", "1", "--s", "0.6",
              "--w", "0.5", "--out", "j.csv"])
        manifest = json.loads(_read(tmp_path / "from_config" / "j.csv.manifest.json"))
        assert manifest["seed"] == 11
        main(["--config", str(cfg), "--seed", "12", "--out-dir", str(tmp_path / "cli"),
              "theory", "joint", "--r", "1", "--s", "0.6", "--w", "0.5", "--out", "j.csv"])
        manifest = json.loads(_read(tmp_path / "cli" / "j.csv.manifest.json"))
        assert manifest["seed"] == 12


class TestExitCodes:
    def test_usage_error_is_one(self):
        with pytest.raises(SystemExit) as exc:
            main(["theory", "mixture", "--sigma2", "0.5"])  # missing --beta
        assert exc.value.code == 1

    def test_numerical_failure_is_two(self, tmp_path, capsys):
        rc = main(["--out-dir", str(tmp_path), "simulate", "mixture", "--d", "40",
                   "--beta", "0.5", "--sigma2", "0.5", "--w", "1", "--n", "100",
                   "--out", "s.csv"])
        assert rc == 2
        assert "numerical failure" in capsys.readouterr().err

    def test_validation_failure_is_three(self, tmp_path, monkeypatch, capsys):
        import cfglab.acceptance as acc

        monkeypatch.setattr(
            acc, "_CRITERIA", [(1, "stub_criterion", 1.0, lambda quick: (False, "hook"))]
        )
        rc = main(["--out-dir", str(tmp_path), "validate", "--criteria", "1"])
        assert rc == 3
        assert "FAIL] criterion 1: stub_criterion" in capsys.readouterr().out

    def test_validate_passing_subset_is_zero(self, tmp_path):
        rc = main(["--out-dir", str(tmp_path), "validate", "--criteria", "1,5"])
        assert rc == 0
