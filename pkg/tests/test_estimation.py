"""Moment estimators: exact small cases, path equivalence, statistics."""
import json

import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

import specmix as sp
from specmix.estimation import MomentEstimate, moment_from_tally
from specmix.recovery import _population_moment_b


def dataset(rows, d):
    return sp.GroupedDataset(d, np.array(rows, dtype=np.uint8))


class TestExactSmallCases:
    def test_single_group_pairs(self):
        # ordered distinct pairs of (0,0,1): (0,0) twice, (0,1) twice, (1,0) twice
        est = sp.empirical_sym_moment(dataset([[0, 0, 1]], 2), 2)
        assert_allclose(est.tensor, [[1 / 3, 1 / 3], [1 / 3, 0.0]], atol=1e-15)

    def test_order_one_is_frequency(self):
        est = sp.empirical_sym_moment(dataset([[0, 0, 1]], 2), 1)
        assert_allclose(est.tensor, [2 / 3, 1 / 3], atol=1e-15)

    def test_constant_group(self):
        est = sp.empirical_sym_moment(dataset([[1, 1, 1]], 3), 3)
        assert_array_equal(est.tensor, sp.outer_power([0.0, 1.0, 0.0], 3))

    def test_five_draw_group(self):
        est = sp.empirical_sym_moment(dataset([[0, 0, 1, 1, 1]], 2), 2)
        assert_allclose(est.tensor, [[0.1, 0.3], [0.3, 0.3]], atol=1e-15)

    def test_mass_one_and_symmetry(self, blend_mix):
        ds = sp.draw_groups(blend_mix, 4, 200, seed=4)
        for r in (1, 2, 3, 4):
            t = sp.empirical_sym_moment(ds, r).tensor
            assert abs(t.sum() - 1.0) < 1e-12
            assert np.all(t >= 0)
            assert_allclose(sp.symmetrize(t), t, atol=1e-14)

    def test_diagonal_transform(self):
        b = sp.DiagonalMap(np.array([2.0, 10.0]))
        plain = sp.empirical_sym_moment(dataset([[0, 0, 1]], 2), 2)
        scaled = sp.empirical_sym_moment(dataset([[0, 0, 1]], 2), 2, b=b)
        assert_allclose(scaled.tensor, plain.tensor * np.outer([2, 10], [2, 10]), atol=1e-14)
        assert scaled.transform is b

    def test_order_out_of_range(self):
        with pytest.raises(ValueError, match="order"):
            sp.empirical_sym_moment(dataset([[0, 1]], 2), 3)
        with pytest.raises(ValueError, match="order"):
            sp.empirical_sym_moment(dataset([[0, 1]], 2), 0)


class TestPathEquivalence:
    def test_tally_matches_raw_bitwise(self, blend_mix):
        rng = np.random.default_rng(0)
        for trial in range(12):
            d = int(rng.integers(2, 4))
            k = int(rng.integers(2, 6))
            n = int(rng.integers(1, 101))
            rows = rng.integers(0, d, size=(n, k))
            ds = dataset(rows, d)
            h = sp.tally(ds)
            for r in range(1, k + 1):
                raw = sp.empirical_sym_moment(ds, r, method="raw").tensor
                via_tally = moment_from_tally(h, r).tensor
                assert_array_equal(raw, via_tally)

    def test_auto_dispatch_matches(self, blend_mix):
        ds = sp.draw_groups(blend_mix, 3, 2000, seed=7)
        # n=2000 > 10 * C(5,2)=100, so auto tallies; force raw to compare
        auto = sp.empirical_sym_moment(ds, 2, method="auto").tensor
        raw = sp.empirical_sym_moment(ds, 2, method="raw").tensor
        assert_array_equal(auto, raw)

    def test_histogram_input(self, blend_mix):
        ds = sp.draw_groups(blend_mix, 3, 150, seed=9)
        h = sp.tally(ds)
        assert_array_equal(
            sp.empirical_sym_moment(h, 2).tensor,
            sp.empirical_sym_moment(ds, 2, method="raw").tensor,
        )

    def test_unknown_method(self, blend_mix):
        ds = sp.draw_groups(blend_mix, 3, 10, seed=0)
        with pytest.raises(ValueError, match="method"):
            sp.empirical_sym_moment(ds, 2, method="bogus")


class TestStatisticalBehaviour:
    def test_unbiased_over_seeds(self, blend_mix):
        n_seeds = 200
        per = {r: [] for r in range(1, 6)}
        for s in range(n_seeds):
            h = sp.tally(sp.draw_groups(blend_mix, 5, 2000, seed=1000 + s))
            for r in per:
                per[r].append(moment_from_tally(h, r).tensor)
        for r, tensors in per.items():
            stack = np.stack(tensors)
            se = stack.std(axis=0, ddof=1) / np.sqrt(n_seeds)
            dev = np.abs(stack.mean(axis=0) - sp.population_moment(blend_mix, r))
            assert np.all(dev <= 4.5 * se + 1e-12), f"bias at order {r}"

    def test_error_decays_like_root_n(self):
        single = sp.make_mixture([1.0], [[0.3, 0.7]])
        pop = sp.population_moment(single, 2)
        ns = [500, 2000, 8000, 32000]
        errs = []
        for n in ns:
            runs = [
                np.linalg.norm(
                    sp.empirical_sym_moment(sp.draw_groups(single, 2, n, seed=300 + s), 2).tensor
                    - pop
                )
                for s in range(20)
            ]
            errs.append(np.mean(runs))
        slope = np.polyfit(np.log(ns), np.log(errs), 1)[0]
        assert abs(slope + 0.5) < 0.15


class TestBuildCHat:
    def test_m_one(self, blend_mix, fixed_xi):
        ds = sp.draw_groups(blend_mix, 2, 10, seed=0)
        assert_array_equal(sp.build_c_hat(ds, 1, sp.b_map(fixed_xi)), [[1.0]])

    def test_exactly_symmetric(self, blend_mix, fixed_xi):
        ds = sp.draw_groups(blend_mix, 4, 500, seed=2)
        c = sp.build_c_hat(ds, 3, sp.b_map(fixed_xi))
        assert_array_equal(c, c.T)
        assert c.shape == (9, 9)

    def test_population_spectrum_matches_gram(self, blend_mix, fixed_xi):
        # nonzero spectrum of the population operator equals the spectrum of
        # G_ij = sqrt(w_i w_j) <B p_i, B p_j>^2
        b = sp.b_map(fixed_xi)
        c = sp.build_c_hat(_population_moment_b(blend_mix, 4, b), 3, b)
        lam = np.sort(np.linalg.eigvalsh(c))[::-1]
        bp = blend_mix.components * b.diag
        w = blend_mix.weights
        gram = np.sqrt(np.outer(w, w)) * (bp @ bp.T) ** 2
        assert_allclose(lam[:3], np.sort(np.linalg.eigvalsh(gram))[::-1], atol=1e-12)
        assert_allclose(
            lam[:3], [6.65228917e-02, 2.78648007e-03, 3.79295864e-04], rtol=1e-6
        )
        assert np.abs(lam[3:]).max() < 1e-14
        assert sp.numerical_rank(c) == 3

    def test_rejects_wrong_precomputed_order(self, blend_mix, fixed_xi):
        b = sp.b_map(fixed_xi)
        with pytest.raises(ValueError, match="order"):
            sp.build_c_hat(_population_moment_b(blend_mix, 3, b), 3, b)


class TestBuildEHat:
    def test_population_value(self, blend_mix):
        # expectation of the order-2 estimate is the order-2 population moment
        per = [
            sp.build_e_hat(sp.draw_groups(blend_mix, 4, 2000, seed=50 + s), 3).tensor
            for s in range(100)
        ]
        stack = np.stack(per)
        se = stack.std(axis=0, ddof=1) / np.sqrt(len(per))
        dev = np.abs(stack.mean(axis=0) - sp.population_moment(blend_mix, 2))
        assert np.all(dev <= 4.5 * se + 1e-12)

    def test_m_two_is_mean(self, blend_mix):
        ds = sp.draw_groups(blend_mix, 3, 400, seed=6)
        assert_array_equal(
            sp.build_e_hat(ds, 2).tensor, sp.empirical_sym_moment(ds, 1).tensor
        )

    def test_rejects_small_m(self, blend_mix):
        ds = sp.draw_groups(blend_mix, 3, 10, seed=0)
        with pytest.raises(ValueError):
            sp.build_e_hat(ds, 1)


class TestMomentEstimateJson:
    def test_round_trip(self, blend_mix, fixed_xi):
        ds = sp.draw_groups(blend_mix, 3, 50, seed=1)
        est = sp.empirical_sym_moment(ds, 2, b=sp.b_map(fixed_xi))
        again = MomentEstimate.from_json(est.to_json())
        assert_array_equal(again.tensor, est.tensor)
        assert again.order == 2 and again.n_groups == 50
        assert_allclose(again.transform.diag, est.transform.diag)

    def test_round_trip_no_transform(self, blend_mix):
        est = sp.empirical_sym_moment(sp.draw_groups(blend_mix, 3, 20, seed=1), 1)
        again = MomentEstimate.from_json(est.to_json())
        assert again.transform is None
        assert_array_equal(again.tensor, est.tensor)

    def test_schema(self, blend_mix):
        est = sp.empirical_sym_moment(sp.draw_groups(blend_mix, 3, 20, seed=1), 2)
        obj = json.loads(est.to_json())
        assert set(obj) == {"order", "dim", "n_groups", "transform", "entries"}
        assert len(obj["entries"]) == 9
