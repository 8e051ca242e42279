"""Tests for the experiment harness: config parsing, sweep enumeration,
seeding, bound gating, CSV output, and the command-line entry points.

Determinism is the load-bearing contract here, so several tests compare
output bytes across repeat runs, thread counts, and process boundaries.
"""

import csv
import json
import math
import os
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from linsysid import cli
from linsysid.acquisition import RegionViolationError
from linsysid.harness import (
    CSV_HEADER,
    EXPERIMENTS,
    ExperimentConfig,
    bounds_for_point,
    build_system,
    bundled_config_path,
    run,
    sweep_points,
    trial_stream,
    validate,
)
from linsysid.systems import builtin

SRC_DIR = Path(__file__).resolve().parent.parent / "src"
BUNDLED = ("fig1", "fig2", "fig3", "fig4", "fig5", "rate_check")


def minimal_config(**overrides):
    raw = {
        "experiment": "custom",
        "system": "pendulum",
        "N": [24],
        "q": [0.6],
        "trials": 2,
        "master_seed": 0,
    }
    raw.update(overrides)
    return raw


def write_config(tmp_path, raw, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(raw))
    return path


def read_rows(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


class TestConfigParsing:
    def test_defaults_applied(self):
        cfg = ExperimentConfig.from_dict(
            {"experiment": "fig1_q_sweep", "system": "pendulum", "N": [100], "q": [0.6]}
        )
        assert cfg.trials == 100
        assert cfg.master_seed == 0
        assert cfg.delta == 0.1
        assert cfg.lambda_grid == (0.0,)
        assert cfg.output_path == "fig1_q_sweep.csv"
        assert cfg.init_perturbation_std == 0.0

    def test_unknown_keys_rejected_with_listing(self):
        raw = minimal_config(qq=[1.0])
        with pytest.raises(ValueError, match=r"unknown config key\(s\): \['qq'\]"):
            ExperimentConfig.from_dict(raw)
        with pytest.raises(ValueError, match="allowed keys"):
            ExperimentConfig.from_dict(raw)

    @pytest.mark.parametrize("field", ["experiment", "system", "N"])
    def test_required_fields(self, field):
        raw = minimal_config()
        del raw[field]
        with pytest.raises(ValueError, match=f"config field '{field}' is required"):
            ExperimentConfig.from_dict(raw)

    def test_unknown_experiment_name(self):
        with pytest.raises(ValueError, match="unknown experiment 'fig9'"):
            ExperimentConfig.from_dict(minimal_config(experiment="fig9"))

    def test_axis_value_validation(self):
        with pytest.raises(ValueError, match="'q' entries must be positive"):
            ExperimentConfig.from_dict(minimal_config(q=[0.5, 0.0]))
        with pytest.raises(ValueError, match="'lambda' entries must be nonnegative"):
            ExperimentConfig.from_dict(minimal_config(**{"lambda": [-1.0]}))
        with pytest.raises(ValueError, match="'N' entries must be positive integers"):
            ExperimentConfig.from_dict(minimal_config(N=[10.5]))
        with pytest.raises(ValueError, match="'N' entries must be positive integers"):
            ExperimentConfig.from_dict(minimal_config(N=[0]))
        with pytest.raises(ValueError, match="must be a nonempty list"):
            ExperimentConfig.from_dict(minimal_config(N=[]))

    def test_booleans_are_not_numbers(self):
        with pytest.raises(ValueError, match="non-numeric entry"):
            ExperimentConfig.from_dict(minimal_config(q=[True]))
        with pytest.raises(ValueError, match="'trials' must be an integer"):
            ExperimentConfig.from_dict(minimal_config(trials=True))

    def test_m_vectors_must_share_length(self):
        raw = minimal_config(m=[[0.1, 0.1, 0.0], [0.2, 0.2]])
        with pytest.raises(ValueError, match="'m' vectors must share one length"):
            ExperimentConfig.from_dict(raw)

    def test_single_trajectory_axis_rules(self):
        with pytest.raises(ValueError, match="requires a sigma_u list"):
            ExperimentConfig.from_dict(
                {"experiment": "fig2_single_traj", "system": "pendulum", "N": [100]}
            )
        with pytest.raises(ValueError, match="'q' is not applicable"):
            ExperimentConfig.from_dict(
                {
                    "experiment": "fig2_single_traj",
                    "system": "pendulum",
                    "N": [100],
                    "q": [0.5],
                    "sigma_u": [0.5],
                }
            )
        with pytest.raises(ValueError, match="'sigma_u' is not applicable to fig1_q_sweep"):
            ExperimentConfig.from_dict(
                minimal_config(experiment="fig1_q_sweep", sigma_u=[0.5])
            )

    def test_rate_check_axis_rules(self):
        raw = {"experiment": "rate_check", "system": "pendulum", "N": [1000]}
        cfg = ExperimentConfig.from_dict(raw)
        assert cfg.c0 == 1.0
        with pytest.raises(ValueError, match="'q' is not applicable to rate_check"):
            ExperimentConfig.from_dict({**raw, "q": [0.5]})
        with pytest.raises(ValueError, match="'c0' must be positive"):
            ExperimentConfig.from_dict({**raw, "c0": -1.0})

    def test_multi_experiment_requires_q(self):
        raw = minimal_config()
        del raw["q"]
        with pytest.raises(ValueError, match="custom requires a q list"):
            ExperimentConfig.from_dict(raw)

    def test_unknown_system_keys_rejected(self):
        raw = minimal_config(system={"name": "pendulum", "theta": [[1.0]]})
        with pytest.raises(ValueError, match=r"unknown system key\(s\): \['theta'\]"):
            ExperimentConfig.from_dict(raw)

    def test_from_json_reports_parse_position(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text('{\n  "experiment": "custom",\n  "system": pendulum\n}')
        with pytest.raises(ValueError, match="line 3, column 13"):
            ExperimentConfig.from_json(path)

    def test_from_json_missing_file(self, tmp_path):
        with pytest.raises(ValueError, match="cannot read config"):
            ExperimentConfig.from_json(tmp_path / "absent.json")

    def test_from_json_prefixes_path_on_field_errors(self, tmp_path):
        path = write_config(tmp_path, minimal_config(trials=0))
        with pytest.raises(ValueError, match=r"config\.json.*trials must be at least 1"):
            ExperimentConfig.from_json(path)

    def test_region_parsing(self):
        cfg = ExperimentConfig.from_dict(
            minimal_config(
                region={"kind": "box", "lower": [-2, -2, -2], "upper": [2, 2, 2]}
            )
        )
        assert cfg.region.kind == "box"
        with pytest.raises(ValueError, match="unknown region kind 'ball'"):
            ExperimentConfig.from_dict(minimal_config(region={"kind": "ball"}))
        with pytest.raises(ValueError, match="requires 'lower' and 'upper'"):
            ExperimentConfig.from_dict(minimal_config(region={"kind": "box"}))


class TestBuildSystem:
    def test_builtin_by_name(self):
        cfg = ExperimentConfig.from_dict(minimal_config())
        assert build_system(cfg).name == "pendulum"

    def test_noise_override(self):
        raw = minimal_config(
            system={"name": "pendulum", "noise": {"kind": "gaussian_isotropic", "scale": 2.0}}
        )
        sys_spec = build_system(ExperimentConfig.from_dict(raw))
        assert sys_spec.noise.kind == "gaussian_isotropic"
        assert sys_spec.noise.scale == 2.0
        assert sys_spec.theta_true.shape == (2, 3)

    def test_noise_disable(self):
        raw = minimal_config(system={"name": "linear2x1", "noise": {"kind": "none"}})
        sys_spec = build_system(ExperimentConfig.from_dict(raw))
        assert sys_spec.noise.sigma_w == 0.0

    def test_envelope_override_and_removal(self):
        raw = minimal_config(system={"name": "pendulum", "envelope": [1.5, 3.0]})
        assert build_system(ExperimentConfig.from_dict(raw)).envelope == (1.5, 3.0)
        raw = minimal_config(system={"name": "pendulum", "envelope": None})
        assert build_system(ExperimentConfig.from_dict(raw)).envelope is None

    def test_unknown_builtin(self):
        cfg = ExperimentConfig.from_dict(minimal_config(system="vanderpol"))
        with pytest.raises(ValueError, match="unknown builtin system"):
            build_system(cfg)


class TestSweepEnumeration:
    def test_multi_experiment_order_q_m_lambda_n(self):
        raw = minimal_config(
            q=[0.3, 0.6],
            m=[[0.0, 0.0, 0.0], [0.1, 0.0, 0.0]],
            N=[20, 40],
            **{"lambda": [0.0, 1.0]},
        )
        cfg = ExperimentConfig.from_dict(raw)
        pts = sweep_points(cfg, build_system(cfg))
        assert len(pts) == 16
        expected = [
            (q, m1, lam, n)
            for q in (0.3, 0.6)
            for m1 in (0.0, 0.1)
            for lam in (0.0, 1.0)
            for n in (20, 40)
        ]
        got = [(p.q, p.m_norm1, p.lam, p.num_experiments) for p in pts]
        assert got == expected
        assert [p.index for p in pts] == list(range(16))

    def test_single_trajectory_order_sigma_lambda_n(self):
        raw = {
            "experiment": "fig2_single_traj",
            "system": "pendulum",
            "N": [100, 200],
            "sigma_u": [0.1, 0.5],
            "lambda": [0.0, 2.0],
        }
        cfg = ExperimentConfig.from_dict(raw)
        pts = sweep_points(cfg, build_system(cfg))
        got = [(p.sigma_u, p.lam, p.num_experiments) for p in pts]
        expected = [
            (s, lam, n) for s in (0.1, 0.5) for lam in (0.0, 2.0) for n in (100, 200)
        ]
        assert got == expected
        assert all(p.q is None and p.m is None and p.acquisition is None for p in pts)

    def test_rate_check_ties_offset_to_sample_count(self):
        raw = {
            "experiment": "rate_check",
            "system": "pendulum",
            "N": [16, 256, 10000],
            "c0": 0.5,
        }
        cfg = ExperimentConfig.from_dict(raw)
        pts = sweep_points(cfg, build_system(cfg))
        for point in pts:
            assert point.q == pytest.approx(0.5 * point.num_experiments ** -0.25, rel=1e-15)
        assert pts[0].q == pytest.approx(0.25)
        assert pts[1].q == pytest.approx(0.125)

    def test_m_dimension_mismatch(self):
        raw = minimal_config(m=[[0.1, 0.1]])
        cfg = ExperimentConfig.from_dict(raw)
        with pytest.raises(ValueError, match="length 2 but system 'pendulum' has dimension 3"):
            sweep_points(cfg, build_system(cfg))

    def test_region_violations_surface_before_any_simulation(self):
        raw = minimal_config(
            q=[0.6],
            region={"kind": "box", "lower": [-0.1, -0.1, -0.1], "upper": [0.1, 0.1, 0.1]},
        )
        cfg = ExperimentConfig.from_dict(raw)
        with pytest.raises(RegionViolationError):
            sweep_points(cfg, build_system(cfg))

    def test_default_center_is_origin(self):
        cfg = ExperimentConfig.from_dict(minimal_config())
        pts = sweep_points(cfg, build_system(cfg))
        assert pts[0].m_norm1 == 0.0
        np.testing.assert_array_equal(pts[0].m, np.zeros(3))


class TestTrialSeeding:
    def test_streams_are_reproducible(self):
        a = trial_stream(42, 3, 7).uniform(size=8)
        b = trial_stream(42, 3, 7).uniform(size=8)
        np.testing.assert_array_equal(a, b)

    def test_distinct_cells_get_distinct_states(self):
        # 150 points x 80 trials = 12000 cells; all derived seed states differ.
        seen = set()
        for point in range(150):
            for trial in range(80):
                key = tuple(np.random.SeedSequence((5, point, trial)).generate_state(4))
                assert key not in seen
                seen.add(key)
        assert len(seen) == 12000

    def test_master_seed_separates_runs(self):
        draws_a = trial_stream(1, 0, 0).uniform(size=4)
        draws_b = trial_stream(2, 0, 0).uniform(size=4)
        assert not np.array_equal(draws_a, draws_b)

    def test_axes_are_not_interchangeable(self):
        # (point=1, trial=0) and (point=0, trial=1) must differ.
        a = trial_stream(0, 1, 0).uniform(size=4)
        b = trial_stream(0, 0, 1).uniform(size=4)
        assert not np.array_equal(a, b)


class TestBoundGating:
    def _points(self, raw):
        cfg = ExperimentConfig.from_dict(raw)
        sys_spec = build_system(cfg)
        return cfg, sys_spec, sweep_points(cfg, sys_spec)

    def test_enabled_inside_envelope(self):
        cfg, sys_spec, pts = self._points(minimal_config(q=[0.6], N=[100]))
        report, reason = bounds_for_point(sys_spec, pts[0], cfg.delta)
        assert reason == "bounds enabled"
        assert report is not None and report.total > 0

    def test_skipped_without_envelope(self):
        cfg, sys_spec, pts = self._points(
            minimal_config(system="strong", q=[0.05], m=[[1.2, 1.2, 1.2]], N=[100])
        )
        report, reason = bounds_for_point(sys_spec, pts[0], cfg.delta)
        assert report is None
        assert reason == "bounds skipped: envelope (c,β) unset"

    def test_skipped_below_burn_in(self):
        cfg, sys_spec, pts = self._points(minimal_config(q=[0.6], N=[8]))
        report, reason = bounds_for_point(sys_spec, pts[0], cfg.delta)
        assert report is None
        assert reason == "burn-in N ≥ 12 unmet; bounds skipped"

    def test_skipped_when_reach_meets_envelope_radius(self):
        cfg, sys_spec, pts = self._points(
            minimal_config(q=[1.5], m=[[0.6, 0.0, 0.0]], N=[100])
        )
        report, reason = bounds_for_point(sys_spec, pts[0], cfg.delta)
        assert report is None
        assert reason == (
            "bounds skipped: ‖m‖₁ + q = 2.1 is not below the envelope radius c = 2"
        )

    def test_boundary_counts_as_violation(self):
        cfg, sys_spec, pts = self._points(minimal_config(q=[2.0], N=[100]))
        report, reason = bounds_for_point(sys_spec, pts[0], cfg.delta)
        assert report is None
        assert "not below the envelope radius" in reason

    def test_skipped_for_single_trajectory(self):
        raw = {
            "experiment": "fig2_single_traj",
            "system": "pendulum",
            "N": [100],
            "sigma_u": [0.5],
        }
        cfg, sys_spec, pts = self._points(raw)
        report, reason = bounds_for_point(sys_spec, pts[0], cfg.delta)
        assert report is None
        assert reason == "bounds skipped: single-trajectory baseline has no designed excitation"


class TestRunOutput:
    def test_header_is_pinned(self):
        assert CSV_HEADER == (
            "experiment,system,q,m_norm1,lambda,sigma_u,N,trial,error,"
            "bound_total,bound_noise,bound_nonlin,bound_reg,status"
        )

    def test_row_layout_and_aggregation(self, tmp_path):
        cfg = ExperimentConfig.from_dict(
            minimal_config(q=[0.6, 0.9], N=[24, 48], trials=3, master_seed=7)
        )
        summary = run(cfg, out_dir=tmp_path)
        assert summary.rows_written == 16
        assert summary.failed_cells == 0
        assert summary.output_path == tmp_path / "custom.csv"
        header, rows = read_rows(summary.output_path)
        assert ",".join(header) == CSV_HEADER
        assert len(rows) == 16
        per_point = {}
        for row in rows:
            key = (row[2], row[6])
            per_point.setdefault(key, []).append(row)
        assert len(per_point) == 4
        for key, group in per_point.items():
            trials, agg = group[:3], group[3]
            assert [r[7] for r in trials] == ["0", "1", "2"]
            assert all(len(r) == 14 for r in trials)
            assert all(r[13] == "ok" for r in trials)
            assert agg[7] == "-1" and agg[8] == "" and agg[13] == "ok"
            assert len(agg) == 16
            errors = np.array([float(r[8]) for r in trials])
            assert abs(float(agg[14]) - errors.mean()) <= 1e-12
            assert abs(float(agg[15]) - errors.std()) <= 1e-12

    def test_noiseless_linear_recovery_is_exact(self, tmp_path):
        raw = {
            "experiment": "custom",
            "system": {"name": "linear2x1", "noise": {"kind": "none"}},
            "N": [12],
            "q": [0.5],
            "trials": 1,
            "master_seed": 0,
        }
        cfg = ExperimentConfig.from_dict(raw)
        summary = run(cfg, out_dir=tmp_path)
        _, rows = read_rows(summary.output_path)
        agg = rows[-1]
        assert agg[7] == "-1"
        assert float(agg[14]) <= 1e-8

    def test_single_trajectory_rows(self, tmp_path):
        raw = {
            "experiment": "custom",
            "system": "pendulum",
            "N": [200],
            "sigma_u": [0.5],
            "trials": 3,
            "master_seed": 5,
        }
        cfg = ExperimentConfig.from_dict(raw)
        summary = run(cfg, out_dir=tmp_path)
        _, rows = read_rows(summary.output_path)
        for row in rows:
            assert row[2] == "" and row[3] == ""
            assert row[5] == "0.5"
            assert row[9:13] == ["", "", "", ""]
        assert rows[-1][13] == "ok"
        assert float(rows[-1][14]) > 0

    def test_divergence_recorded_not_raised(self, tmp_path):
        raw = {
            "experiment": "custom",
            "system": "strong",
            "N": [2000],
            "sigma_u": [1.0],
            "trials": 2,
            "master_seed": 1,
        }
        cfg = ExperimentConfig.from_dict(raw)
        summary = run(cfg, out_dir=tmp_path)
        _, rows = read_rows(summary.output_path)
        statuses = [row[13] for row in rows]
        assert "diverged" in statuses
        agg = rows[-1]
        assert agg[13] == f"failed={summary.failed_cells}"
        assert summary.failed_cells > 0

    def test_rank_deficiency_recorded_not_raised(self, tmp_path):
        raw = {
            "experiment": "custom",
            "system": "linear2x1",
            "N": [2],
            "q": [0.5],
            "trials": 2,
            "master_seed": 0,
        }
        cfg = ExperimentConfig.from_dict(raw)
        summary = run(cfg, out_dir=tmp_path)
        _, rows = read_rows(summary.output_path)
        assert [row[13] for row in rows] == ["rank_deficient", "rank_deficient", "failed=2"]
        agg = rows[-1]
        assert agg[14] == "" and agg[15] == ""
        assert summary.failed_cells == 2

    def test_bound_columns_constant_within_point(self, tmp_path):
        cfg = ExperimentConfig.from_dict(minimal_config(q=[0.6], N=[24], trials=4))
        summary = run(cfg, out_dir=tmp_path)
        _, rows = read_rows(summary.output_path)
        bound_cells = {tuple(row[9:13]) for row in rows}
        assert len(bound_cells) == 1
        total, noise, nonlin, reg = (float(v) for v in rows[0][9:13])
        assert total == pytest.approx(noise + nonlin + reg, abs=1e-12)


class TestDeterminism:
    def _bytes(self, tmp_path, name, **kwargs):
        cfg = ExperimentConfig.from_dict(
            minimal_config(q=[0.6], N=[24, 48], trials=6, master_seed=11)
        )
        out = tmp_path / name
        summary = run(cfg, out_dir=out, **kwargs)
        return summary.output_path.read_bytes()

    def test_byte_identical_across_runs(self, tmp_path):
        assert self._bytes(tmp_path, "a") == self._bytes(tmp_path, "b")

    def test_byte_identical_across_thread_counts(self, tmp_path):
        serial = self._bytes(tmp_path, "serial", threads=1)
        for threads in (2, 4, 8):
            assert self._bytes(tmp_path, f"t{threads}", threads=threads) == serial

    def test_master_seed_override_changes_output(self, tmp_path):
        base = self._bytes(tmp_path, "base")
        other = self._bytes(tmp_path, "override", master_seed=12)
        assert base != other

    def test_thread_count_validation(self, tmp_path):
        cfg = ExperimentConfig.from_dict(minimal_config())
        with pytest.raises(ValueError, match="threads must be at least 1"):
            run(cfg, out_dir=tmp_path, threads=0)


class TestValidate:
    def test_reports_bound_status_per_point(self, tmp_path):
        raw = minimal_config(q=[0.6], N=[8, 100], trials=5)
        path = write_config(tmp_path, raw)
        lines = validate(path)
        assert lines[0] == "config ok: experiment=custom system=pendulum points=2 trials=5"
        assert lines[1] == "point 0: q=0.6 ‖m‖₁=0 lambda=0 N=8: burn-in N ≥ 12 unmet; bounds skipped"
        assert lines[2] == "point 1: q=0.6 ‖m‖₁=0 lambda=0 N=100: bounds enabled"

    def test_single_trajectory_lines(self, tmp_path):
        raw = {
            "experiment": "fig2_single_traj",
            "system": "pendulum",
            "N": [100],
            "sigma_u": [0.5],
        }
        path = write_config(tmp_path, raw)
        lines = validate(path)
        assert lines[1] == (
            "point 0: sigma_u=0.5 lambda=0 N=100: "
            "bounds skipped: single-trajectory baseline has no designed excitation"
        )

    def test_envelope_free_sweep_is_simulation_only(self):
        lines = validate(bundled_config_path("fig4"))
        assert all("bounds skipped: envelope (c,β) unset" in line for line in lines[1:])

    def test_propagates_config_errors(self, tmp_path):
        path = write_config(tmp_path, minimal_config(trials=0))
        with pytest.raises(ValueError, match="trials must be at least 1"):
            validate(path)


class TestBundledConfigs:
    @pytest.mark.parametrize("name", BUNDLED)
    def test_parses_and_validates(self, name):
        path = bundled_config_path(name)
        lines = validate(path)
        assert lines[0].startswith("config ok:")

    def test_expected_families(self):
        families = {
            ExperimentConfig.from_json(bundled_config_path(name)).experiment
            for name in BUNDLED
        }
        assert families == set(EXPERIMENTS) - {"custom"}

    def test_designed_sweeps_have_bounds_enabled(self):
        # The q-sweep study overlays its bound curves, so every point there
        # must pass the bound preconditions.
        lines = validate(bundled_config_path("fig1"))
        assert all(line.endswith("bounds enabled") for line in lines[1:])

    def test_unknown_bundle_lists_available(self):
        with pytest.raises(ValueError, match="available: \\['fig1', 'fig2'"):
            bundled_config_path("fig9")


class TestCommandLine:
    def _run_cli(self, *args):
        env = dict(os.environ)
        env["PYTHONPATH"] = str(SRC_DIR) + os.pathsep + env.get("PYTHONPATH", "")
        return subprocess.run(
            [sys.executable, "-m", "linsysid.cli", *args],
            capture_output=True,
            text=True,
            env=env,
        )

    def test_validate_success(self):
        result = self._run_cli("validate", str(bundled_config_path("fig4")))
        assert result.returncode == 0
        assert result.stdout.startswith("config ok:")
        assert result.stderr == ""

    def test_validate_bad_json_exits_2(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{not json")
        result = self._run_cli("validate", str(path))
        assert result.returncode == 2
        assert result.stdout == ""
        assert result.stderr.startswith("error: ")
        assert "line 1" in result.stderr

    def test_run_matches_in_process_output(self, tmp_path):
        raw = minimal_config(q=[0.6], N=[24], trials=4, master_seed=3)
        cfg_path = write_config(tmp_path, raw)
        cli_dir = tmp_path / "cli"
        result = self._run_cli(
            "run", str(cfg_path), "--out", str(cli_dir), "--threads", "2", "--seed", "9"
        )
        assert result.returncode == 0
        assert "wrote 5 rows to" in result.stdout
        assert "(0 failed cells)" in result.stdout
        ref_dir = tmp_path / "ref"
        summary = run(ExperimentConfig.from_dict(raw), out_dir=ref_dir, master_seed=9)
        assert (cli_dir / "custom.csv").read_bytes() == summary.output_path.read_bytes()

    def test_validate_tolerates_closed_stdout_pipe(self, tmp_path, monkeypatch):
        # `linsysid validate ... | head` must not crash once head exits.
        cfg_path = write_config(tmp_path, minimal_config())
        read_end, write_end = os.pipe()
        os.close(read_end)
        closed_stdout = os.fdopen(write_end, "w", buffering=1)
        monkeypatch.setattr(sys, "stdout", closed_stdout)
        assert cli.main(["validate", str(cfg_path)]) == 0

    def test_run_exit_code_counts_failed_cells(self, tmp_path):
        raw = {
            "experiment": "custom",
            "system": "strong",
            "N": [2000],
            "sigma_u": [1.0],
            "trials": 2,
            "master_seed": 1,
        }
        cfg_path = write_config(tmp_path, raw)
        expected = run(
            ExperimentConfig.from_dict(raw), out_dir=tmp_path / "ref"
        ).failed_cells
        assert expected > 0
        result = self._run_cli("run", str(cfg_path), "--out", str(tmp_path / "cli"))
        assert result.returncode == min(expected, 255)
        assert f"({expected} failed cells)" in result.stdout
