"""CLI contract tests: schemas, byte-identity, exit codes, baseline handling."""

import math

import numpy as np
import pytest

from rispla.cli import (
    EXIT_OK,
    EXIT_RUNTIME,
    EXIT_USAGE,
    EXIT_VALIDATION,
    db_to_linear,
    linear_to_db,
    main,
)

SCENARIO = "scenarios/table1.cfg"


def run_cli(*args) -> int:
    return main([str(a) for a in args])


class TestSweepSchema:
    def test_header_and_shape(self, tmp_path):
        out = tmp_path / "pfa.csv"
        code = run_cli("sweep-pfa", "--scenario", SCENARIO, "--target-pfa", 0.05,
                       "--lq-grid", "0:20:40", "--trials", 5000, "--seed", 3,
                       "--output", out)
        assert code == EXIT_OK
        lines = out.read_text().splitlines()
        assert lines[0] == "lq_db,threshold,analytical,empirical,half_width_95,n_trials"
        assert len(lines) == 4  # header + 3 grid points
        fields = lines[1].split(",")
        assert len(fields) == 6
        assert float(fields[0]) == 0.0
        assert abs(float(fields[2]) - 0.05) < 1e-9  # analytical column

    def test_pmd_analytical_column_empty_for_cir(self, tmp_path, scenario_small):
        out = tmp_path / "pmd.csv"
        code = run_cli("sweep-pmd", "--scenario", SCENARIO, "--feature", "cir-magnitude",
                       "--epsilon", 0.5, "--lq-grid", "20", "--trials", 2000,
                       "--output", out)
        assert code == EXIT_OK
        row = out.read_text().splitlines()[1].split(",")
        assert row[2] == ""  # no closed form for the magnitude missed detection

    def test_low_confidence_flagged(self, tmp_path):
        out = tmp_path / "pfa.csv"
        run_cli("sweep-pfa", "--scenario", SCENARIO, "--epsilon", 1e-7,
                "--lq-grid", "100", "--trials", 50, "--output", out)
        assert any(line.startswith("# low_confidence_rows:")
                   for line in out.read_text().splitlines())


class TestRocSchema:
    def test_header_and_monotonicity(self, tmp_path):
        out = tmp_path / "roc.csv"
        code = run_cli("roc", "--scenario", SCENARIO, "--lq-db", 60, "--trials", 20000,
                       "--seed", 5, "--output", out)
        assert code == EXIT_OK
        lines = out.read_text().splitlines()
        assert lines[0] == "epsilon,pfa,pd"
        data = np.array([[float(v) for v in line.split(",")] for line in lines[1:]])
        assert np.all(np.diff(data[:, 0]) > 0)
        assert np.all(np.diff(data[:, 1]) <= 0)

    def test_explicit_epsilon_grid(self, tmp_path):
        out = tmp_path / "roc.csv"
        code = run_cli("roc", "--scenario", SCENARIO, "--epsilons", "1e-6,1e-5,1e-4",
                       "--trials", 2000, "--output", out)
        assert code == EXIT_OK
        lines = out.read_text().splitlines()
        assert len(lines) == 4


class TestOptimizeOutputs:
    def test_gradient_trace_and_summary(self, tmp_path):
        out = tmp_path / "grad.csv"
        code = run_cli("optimize-gradient", "--scenario", SCENARIO, "--target-pfa", 0.05,
                       "--grid", "0:50:500", "--output", out)
        assert code == EXIT_OK
        lines = out.read_text().splitlines()
        assert lines[0] == "coordinate,value,pmd"
        assert len(lines) == 501
        summary = (tmp_path / "grad_summary.csv").read_text().splitlines()
        assert summary[0] == "best_pmd,evaluations,best_profile"
        best_pmd, evals, profile = summary[1].split(",")
        assert float(best_pmd) < 1e-6
        assert int(evals) == 500

    def test_phase_trace_and_summary(self, tmp_path):
        out = tmp_path / "ph.csv"
        code = run_cli("optimize-phases", "--scenario", SCENARIO, "--epsilon", 0.3,
                       "--levels", 4, "--budget", 100000, "--eval-trials", 1000,
                       "--seed", 2, "--output", out)
        # shipped scenario has 256 elements; budget stops the sweep early
        assert code == EXIT_OK
        lines = out.read_text().splitlines()
        assert lines[0] == "coordinate,value,pmd"
        summary = (tmp_path / "ph_summary.csv").read_text().splitlines()[1]
        phases = summary.split(",")[2].split(";")
        assert len(phases) == 256


class TestDeterminism:
    def test_rerun_byte_identical(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        args = ["sweep-pfa", "--scenario", SCENARIO, "--target-pfa", 0.1,
                "--lq-grid", "0:10:20", "--trials", 4000, "--seed", 9]
        run_cli(*args, "--output", a)
        run_cli(*args, "--output", b)
        assert a.read_bytes() == b.read_bytes()

    def test_workers_byte_identical(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        args = ["roc", "--scenario", SCENARIO, "--trials", 4000, "--seed", 9,
                "--feature", "cir-magnitude", "--epsilons", "0.01,0.1,1.0"]
        run_cli(*args, "--workers", 1, "--output", a)
        run_cli(*args, "--workers", 2, "--output", b)
        assert a.read_bytes() == b.read_bytes()


class TestBaselines:
    def test_both_writes_two_files(self, tmp_path):
        out = tmp_path / "pfa.csv"
        code = run_cli("sweep-pfa", "--scenario", SCENARIO, "--target-pfa", 0.05,
                       "--lq-grid", "0:20:40", "--trials", 20000, "--seed", 4,
                       "--baseline", "both", "--output", out)
        assert code == EXIT_OK
        ris = (tmp_path / "pfa_ris.csv").read_text().splitlines()
        noris = (tmp_path / "pfa_noris.csv").read_text().splitlines()
        # false alarm does not depend on the link type: agreement within 3 combined se
        for row_r, row_n in zip(ris[1:], noris[1:]):
            fr, fn = row_r.split(","), row_n.split(",")
            gap = abs(float(fr[3]) - float(fn[3]))
            se = math.hypot(float(fr[4]), float(fn[4])) / 1.96
            assert gap <= 3 * se

    def test_pmd_zero_at_optimized_gradient(self, tmp_path):
        out = tmp_path / "pmd.csv"
        run_cli("sweep-pmd", "--scenario", SCENARIO, "--target-pfa", 0.05,
                "--gradient", 0.0, "--lq-grid", "50:10:100", "--trials", 20000,
                "--seed", 2, "--output", out)
        for line in out.read_text().splitlines()[1:]:
            assert float(line.split(",")[3]) == 0.0  # empirical column

    def test_no_ris_pathloss_uses_friis(self, tmp_path, scenario):
        from rispla.auth import pmd_pathloss, threshold_for_pfa
        from rispla.channel import fspl
        from dataclasses import replace

        out = tmp_path / "pmd.csv"
        run_cli("sweep-pmd", "--scenario", SCENARIO, "--target-pfa", 0.05,
                "--lq-grid", "60", "--trials", 2000, "--baseline", "no-ris",
                "--output", out)
        row = out.read_text().splitlines()[1].split(",")
        sc = replace(scenario, lq_db=60.0)
        eps = threshold_for_pfa(0.05, sc.noise_sigma)
        expected = pmd_pathloss(eps, sc.noise_sigma,
                                fspl(sc.alice_pos, sc.bob_pos, sc),
                                fspl(sc.eve_pos, sc.bob_pos, sc))
        assert float(row[2]) == pytest.approx(expected, rel=1e-12)


class TestExitCodes:
    def test_malformed_scenario_names_line(self, tmp_path, capsys):
        bad = tmp_path / "bad.cfg"
        bad.write_text("alice_pos = 1, 2\n")
        code = run_cli("sweep-pfa", "--scenario", bad, "--epsilon", 1.0,
                       "--lq-grid", "0", "--output", tmp_path / "x.csv")
        assert code == EXIT_USAGE
        assert ":1:" in capsys.readouterr().err

    def test_epsilon_and_target_mutually_exclusive(self, tmp_path):
        with pytest.raises(SystemExit) as exc:
            run_cli("sweep-pfa", "--scenario", SCENARIO, "--epsilon", 1.0,
                    "--target-pfa", 0.05, "--lq-grid", "0", "--output", tmp_path / "x.csv")
        assert exc.value.code == EXIT_USAGE

    def test_target_pfa_refused_for_phase_feature(self, tmp_path):
        code = run_cli("sweep-pfa", "--scenario", SCENARIO, "--feature", "cir-phase",
                       "--target-pfa", 0.05, "--lq-grid", "0", "--trials", 100,
                       "--output", tmp_path / "x.csv")
        assert code == EXIT_USAGE

    def test_exhaustive_guard_is_runtime_error(self, tmp_path):
        code = run_cli("optimize-phases", "--scenario", SCENARIO, "--epsilon", 0.1,
                       "--strategy", "exhaustive", "--output", tmp_path / "x.csv")
        assert code == EXIT_RUNTIME

    def test_unwritable_output(self):
        code = run_cli("sweep-pfa", "--scenario", SCENARIO, "--epsilon", 1.0,
                       "--lq-grid", "0", "--trials", 100,
                       "--output", "/nonexistent-dir/x.csv")
        assert code == EXIT_RUNTIME

    def test_validate_passes_at_reduced_scale(self, capsys):
        code = run_cli("validate", "--scenario", SCENARIO, "--trials", 30000)
        out = capsys.readouterr().out
        assert code == EXIT_OK
        assert out.count("PASS") == 7 and "FAIL" not in out


class TestDbConversions:
    def test_round_trip(self):
        for db in np.linspace(-40, 100, 29):
            assert linear_to_db(db_to_linear(db)) == pytest.approx(db, abs=1e-12)

    def test_lq_column_round_trips(self, tmp_path):
        out = tmp_path / "pfa.csv"
        run_cli("sweep-pfa", "--scenario", SCENARIO, "--epsilon", 1e-5,
                "--lq-grid", "0:7:35", "--trials", 200, "--output", out)
        for line in out.read_text().splitlines()[1:]:
            lq = float(line.split(",")[0])
            assert linear_to_db(db_to_linear(lq)) == pytest.approx(lq, abs=1e-12)
