"""Matched error metric, random baseline, and the experiment harness."""
import csv
import io
import json

import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal
from scipy.optimize import linear_sum_assignment

import specmix as sp
from specmix.experiments import ExperimentConfig, ExperimentReport, run_experiment
from specmix.recovery import RecoveryConfig


class TestMatchedL1Error:
    def test_zero_on_equal(self, blend_mix):
        assert sp.matched_l1_error(blend_mix.components, blend_mix.components) == 0.0

    def test_zero_on_permuted(self, blend_mix):
        assert sp.matched_l1_error(blend_mix.components, blend_mix.components[::-1]) < 1e-15

    def test_hand_computed(self):
        truth = [[1.0, 0.0], [0.0, 1.0]]
        est = [[0.9, 0.1], [0.2, 0.8]]
        assert_allclose(sp.matched_l1_error(truth, est), 0.3, atol=1e-15)

    def test_symmetric(self):
        rng = np.random.default_rng(1)
        for _ in range(5):
            a = rng.dirichlet(np.ones(4), size=3)
            b = rng.dirichlet(np.ones(4), size=3)
            assert_allclose(sp.matched_l1_error(a, b), sp.matched_l1_error(b, a), atol=1e-14)

    def test_triangle_inequality(self):
        rng = np.random.default_rng(2)
        for _ in range(10):
            a, b, c = (rng.dirichlet(np.ones(3), size=3) for _ in range(3))
            ab = sp.matched_l1_error(a, b)
            bc = sp.matched_l1_error(b, c)
            ac = sp.matched_l1_error(a, c)
            assert ac <= ab + bc + 1e-12

    def test_matches_hungarian_solver(self):
        rng = np.random.default_rng(3)
        for m in (2, 4, 6):
            truth = rng.dirichlet(np.ones(5), size=m)
            est = rng.dirichlet(np.ones(5), size=m)
            cost = np.abs(truth[:, None, :] - est[None, :, :]).sum(axis=2)
            rows, cols = linear_sum_assignment(cost)
            expected = cost[rows, cols].sum() / m
            assert_allclose(sp.matched_l1_error(truth, est), expected, atol=1e-12)

    def test_rejects_large_m(self):
        big = np.ones((9, 2)) / 2
        with pytest.raises(ValueError, match="at most"):
            sp.matched_l1_error(big, big)

    def test_rejects_shape_mismatch(self, blend_mix):
        with pytest.raises(ValueError, match="mismatch"):
            sp.matched_l1_error(blend_mix.components, blend_mix.components[:2])


class TestRandomBaseline:
    def test_deterministic(self, blend_mix):
        a = sp.random_baseline(3, 3, 50, 7, blend_mix.components)
        b = sp.random_baseline(3, 3, 50, 7, blend_mix.components)
        assert_array_equal(a.errors, b.errors)
        assert a.mean == b.mean and a.variance == b.variance

    def test_seed_matters(self, blend_mix):
        a = sp.random_baseline(3, 3, 50, 7, blend_mix.components)
        b = sp.random_baseline(3, 3, 50, 8, blend_mix.components)
        assert not np.array_equal(a.errors, b.errors)

    def test_plausible_range(self, blend_mix):
        rep = sp.random_baseline(3, 3, 200, 42, blend_mix.components)
        assert 0.3 < rep.mean < 0.8
        assert rep.variance > 0.0
        assert rep.errors.shape == (200,)

    def test_point_mass_truth(self):
        # |u - e_1|_1 = 2 u_2 for simplex-uniform u, so the mean error is 1
        rep = sp.random_baseline(2, 1, 2000, 0, np.array([[1.0, 0.0]]))
        assert abs(rep.mean - 1.0) < 0.06

    def test_validation(self, blend_mix):
        with pytest.raises(ValueError):
            sp.random_baseline(3, 3, 0, 0, blend_mix.components)
        with pytest.raises(ValueError, match="truth"):
            sp.random_baseline(3, 2, 10, 0, blend_mix.components)


def small_config(blend_mix, fixed_xi, **overrides):
    base = dict(
        mixture=blend_mix,
        group_size=5,
        n_groups=2000,
        reps=3,
        dominating=fixed_xi,
        recovery=RecoveryConfig(m=3, probe="singular"),
        seed=0,
    )
    base.update(overrides)
    return ExperimentConfig(**base)


class TestRunExperiment:
    def test_deterministic(self, blend_mix, fixed_xi):
        a = run_experiment(small_config(blend_mix, fixed_xi))
        b = run_experiment(small_config(blend_mix, fixed_xi))
        assert a.errors == b.errors
        assert a.mean == b.mean

    def test_reasonable_errors(self, blend_mix, fixed_xi):
        rep = run_experiment(small_config(blend_mix, fixed_xi))
        assert rep.excluded == 0
        assert all(e is not None and 0.0 <= e <= 2.0 for e in rep.errors)
        assert 0.0 <= rep.mean <= 2.0
        assert len(rep.seconds) == 3
        assert rep.wall_clock > 0.0

    def test_all_reps_fail(self, blend_mix, fixed_xi):
        # groups of 3 cannot support m=3 (needs 2m-1 = 5 draws)
        cfg = small_config(blend_mix, fixed_xi, group_size=3, n_groups=100)
        rep = run_experiment(cfg)
        assert rep.excluded == 3
        assert rep.errors == [None, None, None]
        assert np.isnan(rep.mean) and np.isnan(rep.variance)
        assert all("setup" in f["tag"] for f in rep.failures)

    def test_rep_seeds_shift_with_master(self, blend_mix, fixed_xi):
        # replicate r of seed s equals replicate r+1 of seed s-1
        a = run_experiment(small_config(blend_mix, fixed_xi, seed=10))
        b = run_experiment(small_config(blend_mix, fixed_xi, seed=11))
        assert a.errors[1:] == b.errors[:-1]

    def test_scheme_name(self, blend_mix):
        cfg = small_config(blend_mix, None, dominating="uniform")
        assert run_experiment(cfg).scheme == "uniform"

    def test_validation(self, blend_mix, fixed_xi):
        with pytest.raises(ValueError, match="reps"):
            small_config(blend_mix, fixed_xi, reps=0)


class TestReportSerialization:
    def test_json_fields(self, blend_mix, fixed_xi):
        rep = run_experiment(small_config(blend_mix, fixed_xi))
        obj = json.loads(rep.to_json())
        for key in ("scheme", "n_groups", "errors", "mean", "variance", "excluded", "config"):
            assert key in obj
        assert obj["n_groups"] == 2000
        assert obj["config"]["recovery"]["m"] == 3

    def test_csv_format(self, blend_mix, fixed_xi):
        rep = run_experiment(small_config(blend_mix, fixed_xi, group_size=3, n_groups=50))
        buf = io.StringIO()
        rep.write_csv(buf)
        rows = list(csv.reader(io.StringIO(buf.getvalue())))
        assert rows[0] == ["scheme", "n_groups", "rep", "error", "seconds"]
        assert len(rows) == 4
        assert rows[1][3] == "nan"  # failed rep

    def test_write_by_extension(self, blend_mix, fixed_xi, tmp_path):
        rep = run_experiment(small_config(blend_mix, fixed_xi))
        json_path = tmp_path / "report.json"
        csv_path = tmp_path / "report.csv"
        rep.write(str(json_path))
        rep.write(str(csv_path))
        assert json.loads(json_path.read_text())["mean"] == rep.mean
        assert csv_path.read_text().startswith("scheme,")

    def test_out_field_triggers_write(self, blend_mix, fixed_xi, tmp_path):
        path = tmp_path / "auto.json"
        run_experiment(small_config(blend_mix, fixed_xi, out=str(path)))
        assert path.exists()


class TestConfigFromJson:
    def test_parses_full_config(self):
        text = json.dumps(
            {
                "mixture": {
                    "weights": [0.5, 0.5],
                    "components": [[0.9, 0.1], [0.2, 0.8]],
                },
                "group_size": 5,
                "n_groups": 1000,
                "reps": 2,
                "dominating": "uniform",
                "recovery": {"m": 2, "probe": "singular"},
                "seed": 3,
            }
        )
        cfg = ExperimentConfig.from_json(text)
        assert cfg.recovery.m == 2 and cfg.recovery.probe == "singular"
        assert cfg.dominating == "uniform" and cfg.seed == 3
        assert cfg.mixture.m == 2

    def test_requires_recovery_m(self):
        text = json.dumps(
            {
                "mixture": {"weights": [1.0], "components": [[0.5, 0.5]]},
                "group_size": 2,
                "n_groups": 10,
                "reps": 1,
            }
        )
        with pytest.raises(ValueError, match="recovery.m"):
            ExperimentConfig.from_json(text)
