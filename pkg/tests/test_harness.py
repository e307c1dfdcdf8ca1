"""Config round-trips, record persistence and reproducibility, run
experiment wiring, bisection behavior, and the verification batteries."""

import json
import subprocess
import sys
from dataclasses import asdict

import numpy as np
import pytest

from stokeswave.harness import (
    ExperimentConfig,
    ExperimentRecord,
    RunRecorder,
    initial_field,
    kernel_symmetry_battery,
    run_experiment,
    threshold_bisect,
    verify_suite,
)
from stokeswave.spectral import Grid1D
from stokeswave.stokeslet import StripPoint, stokeslet_matrix


class TestConfig:
    def test_roundtrip_identical(self):
        cfg = ExperimentConfig(model="cubic-local", n=128, amplitude=0.125,
                               t_end=3.5, seed=99)
        text = cfg.to_text()
        back = ExperimentConfig.from_text(text)
        assert back == cfg
        assert back.to_text() == text

    def test_unknown_fields_rejected(self):
        cfg = ExperimentConfig()
        data = json.loads(cfg.to_text())
        data["bogus"] = 1
        with pytest.raises(ValueError):
            ExperimentConfig.from_text(json.dumps(data))

    def test_validation(self):
        with pytest.raises(ValueError):
            ExperimentConfig(kind="nope")
        with pytest.raises(ValueError):
            ExperimentConfig(family="nope")

    def test_rho_bar(self):
        cfg = ExperimentConfig(rho_plus=1.0, rho_minus=5.0)
        assert cfg.rho_bar == 1.0


class TestInitialData:
    def test_families(self):
        g = Grid1D(64)
        cfg = ExperimentConfig(family="single_mode", amplitude=2.0, mode=3)
        u = initial_field(cfg, g)
        assert np.max(np.abs(u.values + 2.0 * np.sin(3 * g.nodes))) < 1e-14
        cfg = ExperimentConfig(family="graph_cos", kind="graph", amplitude=0.5, mode=2)
        u = initial_field(cfg, g)
        assert np.max(np.abs(u.values - 0.5 * np.cos(2 * g.nodes))) < 1e-14

    def test_odd_random_seeded(self):
        g = Grid1D(64)
        cfg = ExperimentConfig(family="odd_random", amplitude=1.0, seed=7, band=6)
        u1 = initial_field(cfg, g)
        u2 = initial_field(cfg, g)
        assert np.array_equal(u1.values, u2.values)
        assert abs(u1.linf_norm() - 1.0) < 1e-12
        # odd by construction
        refl = u1.values[(-np.arange(g.n)) % g.n]
        assert np.max(np.abs(u1.values + refl)) < 1e-13


class TestRunExperiment:
    def test_small_quadratic_record(self, tmp_path):
        cfg = ExperimentConfig(model="quadratic", n=128, family="two_mode",
                               amplitude=1e-3, dt_init=0.05, t_end=5.0,
                               record_every=5, fit_lo=1.0,
                               out_dir=str(tmp_path / "run"))
        rec = run_experiment(cfg)
        assert rec.verdict.status == "completed"
        assert (tmp_path / "run" / "series.csv").exists()
        assert (tmp_path / "run" / "summary.txt").exists()
        assert (tmp_path / "run" / "config.json").exists()
        assert (tmp_path / "run" / "spectra.csv").exists()
        header = (tmp_path / "run" / "series.csv").read_text().splitlines()[0]
        assert header.split(",") == rec.columns
        # series monotone in t; summary scalars recomputable from the series
        times = [row["t"] for row in rec.rows]
        assert all(b > a for a, b in zip(times, times[1:]))
        from stokeswave.diagnostics import fit_decay
        refit = fit_decay(np.array(times), np.array([r["l2"] for r in rec.rows]),
                          (rec.summary["fit_lo"], rec.summary["fit_hi"]))
        assert refit == rec.summary["l2_decay_exponent"]

    def test_reproducible_bytes(self, tmp_path):
        texts = []
        for name in ("a", "b"):
            cfg = ExperimentConfig(model="quadratic", n=64, family="single_mode",
                                   amplitude=0.1, dt_init=0.05, t_end=1.0,
                                   record_every=2, out_dir=str(tmp_path / name))
            rec = run_experiment(cfg)
            texts.append((tmp_path / name / "series.csv").read_bytes())
        assert texts[0] == texts[1]

    def test_env_override(self, tmp_path, monkeypatch):
        monkeypatch.setenv("STOKESWAVE_OUT", str(tmp_path / "override"))
        cfg = ExperimentConfig(model="quadratic", n=64, family="single_mode",
                               amplitude=0.1, dt_init=0.05, t_end=0.5,
                               record_every=2, out_dir="inner")
        run_experiment(cfg)
        assert (tmp_path / "override" / "inner" / "series.csv").exists()

    def test_graph_run_interface_written(self, tmp_path):
        cfg = ExperimentConfig(kind="graph", n=64, family="graph_cos",
                               amplitude=1e-3, mode=1, dt_init=0.02, t_end=0.5,
                               record_every=5, fit_lo=0.0,
                               out_dir=str(tmp_path / "g"))
        rec = run_experiment(cfg)
        assert rec.verdict.status == "completed"
        assert (tmp_path / "g" / "interface.csv").exists()
        assert rec.summary["max_arc_chord"] < 1.01


class TestThresholdBisect:
    def test_degenerate(self):
        cfg = ExperimentConfig(model="quadratic", n=64)
        res = threshold_bisect(cfg, 1.0, 1.0, budget=4)
        assert res.status == "degenerate"
        assert res.runs == []

    def test_bad_bracket_reports_verdicts(self):
        # both endpoints tiny: both decay; must report, not bisect
        cfg = ExperimentConfig(model="quadratic", n=64, family="single_mode",
                               dt_init=0.05, t_end=2.0, record_every=10)
        res = threshold_bisect(cfg, 1e-4, 2e-4, budget=3)
        assert res.status == "failed"
        assert len(res.runs) == 2
        assert "decay" in res.message

    def test_small_bracket(self):
        # t_end is the commitment horizon of the classification
        cfg = ExperimentConfig(model="quadratic", n=256, family="single_mode",
                               dt_init=0.01, t_end=2.5, record_every=5,
                               fit_lo=0.0, fit_hi=1.0)
        res = threshold_bisect(cfg, 0.05, 8.0, budget=3)
        assert res.status == "bracketed"
        assert res.width <= (8.0 - 0.05) / 2**3 + 1e-12
        assert 0.05 <= res.lo < res.hi <= 8.0


class TestVerifySuite:
    def test_fast_passes(self):
        report = verify_suite("fast")
        assert report.passed, report.text()

    def test_mutated_kernel_fails_battery(self):
        def mutated(point: StripPoint):
            s = stokeslet_matrix(point)
            s[0, 1] = -s[0, 1]   # flip one off-diagonal sign
            return s

        check = kernel_symmetry_battery(mutated)
        assert not check.passed

    def test_level_validation(self):
        with pytest.raises(ValueError):
            verify_suite("medium")


class TestCli:
    def run_cli(self, *args):
        return subprocess.run([sys.executable, "-m", "stokeswave.cli", *args],
                              capture_output=True, text=True)

    def test_verify_fast(self):
        out = self.run_cli("verify", "--level", "fast")
        assert out.returncode == 0
        assert "all passed" in out.stdout

    def test_run_exit_codes(self, tmp_path):
        cfg = ExperimentConfig(model="quadratic", n=64, family="single_mode",
                               amplitude=0.1, dt_init=0.05, t_end=0.5,
                               record_every=5)
        path = tmp_path / "cfg.json"
        path.write_text(cfg.to_text())
        out = self.run_cli("run", "--config", str(path),
                           "--out", str(tmp_path / "out"))
        assert out.returncode == 0
        assert "status = completed" in out.stdout
        # blow-up exit code is 2
        out = self.run_cli("run", "--config", str(path), "--amplitude", "10.0",
                           "--n", "512", "--t-end", "1.0")
        assert out.returncode == 2

    def test_kernel_check(self):
        out = self.run_cli("kernel-check", "--cutoff", "20")
        assert out.returncode == 0
        assert "status = converged" in out.stdout


class TestRunInvariants:
    def test_dissipation_and_linf_growth(self):
        # cubic-local moderate run: L2 nonincreasing; max|u| within the
        # smoothing-driven growth bound with the fixed C = 0.724
        cfg = ExperimentConfig(model="cubic-local", n=256, family="two_mode_odd",
                               amplitude=0.5, dt_init=0.01, t_end=8.0,
                               record_every=5, fit_lo=1.0)
        rec = run_experiment(cfg)
        assert rec.verdict.status == "completed"
        l2 = [row["l2"] for row in rec.rows]
        assert all(b <= a * (1 + 1e-12) for a, b in zip(l2, l2[1:]))
        linf0 = rec.rows[0]["linf"]
        l20 = rec.rows[0]["l2"]
        for row in rec.rows:
            assert row["linf"] <= linf0 + 0.724 * l20 * row["t"] + 1e-10

    def test_quadratic_dissipation(self):
        cfg = ExperimentConfig(model="quadratic", n=256, family="two_mode",
                               amplitude=0.3, dt_init=0.01, t_end=8.0,
                               record_every=5, fit_lo=1.0)
        rec = run_experiment(cfg)
        l2 = [row["l2"] for row in rec.rows]
        assert all(b <= a * (1 + 1e-12) for a, b in zip(l2, l2[1:]))

    def test_completed_verdict_stable_under_doubling(self):
        # small-data regime: doubling n must not flip completed to blew_up
        for n in (256, 512):
            cfg = ExperimentConfig(model="quadratic", n=n, family="two_mode",
                                   amplitude=1e-3, dt_init=0.05, t_end=30.0,
                                   record_every=10, fit_lo=5.0)
            assert run_experiment(cfg).verdict.status == "completed"

    def test_skewed_blowup_hypothesis(self):
        # the asymmetric family satisfies the displayed sufficient condition
        # L(0) > ||u0||_L2 at large amplitude, and the run indeed blows up
        from stokeswave.diagnostics import LagrangianTracker, functional_L
        from stokeswave.harness import initial_field
        from stokeswave.spectral import Grid1D

        cfg = ExperimentConfig(model="cubic-local", n=1024, family="skewed",
                               amplitude=30.0, dt_init=0.01, t_end=2.0,
                               record_every=5, fit_lo=0.0, fit_hi=0.05)
        u0 = initial_field(cfg, Grid1D(cfg.n))
        l0 = functional_L(u0, LagrangianTracker(delta=cfg.delta_l))
        assert l0 > u0.l2_norm()
        rec = run_experiment(cfg)
        assert rec.verdict.status == "blew_up"
        assert rec.summary["lagrangian_l0"] > rec.summary["l2_initial"]

    def test_kernel_tail_below_tol(self):
        from stokeswave.stokeslet import kernel_l1_check
        chk = kernel_l1_check(40.0, tol=1e-4)
        assert chk.tail_s1 < 1e-4 and chk.tail_s2 < 1e-4
