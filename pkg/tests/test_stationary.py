import math

import numpy as np
import pytest

from orthant.model import build_symmetric_atlas
from orthant.skorokhod import simulate_ensemble
from orthant.stationary import (
    PerturbationSpec, alpha_Y, atlas_stationary_rates, burnin_stationary,
    class_check, n_schedule, perturbed_start, sample_atlas_stationary,
    sample_perturbation, validate_n_schedule,
)


class TestAtlasSampler:
    def test_rates_d3(self):
        assert np.allclose(atlas_stationary_rates(3), [1.5, 1.0, 0.5])

    def test_rates_d1(self):
        assert atlas_stationary_rates(1)[0] == pytest.approx(1.0)

    def test_sample_means_match_rates(self):
        rng = np.random.default_rng(7)
        draws = np.stack([sample_atlas_stationary(3, rng=rng) for _ in range(100_000)])
        means = draws.mean(axis=0)
        expect = np.array([2 / 3, 1.0, 2.0])
        se = draws.std(axis=0, ddof=1) / math.sqrt(draws.shape[0])
        assert np.all(np.abs(means - expect) <= 3 * se)

    def test_seed_determinism(self):
        a = sample_atlas_stationary(4, seed=9)
        b = sample_atlas_stationary(4, seed=9)
        assert np.array_equal(a, b)

    def test_rejects_zero_dimension(self):
        with pytest.raises(ValueError):
            sample_atlas_stationary(0, seed=1)


class TestPerturbations:
    def test_zero_perturbation_identity(self):
        x = np.array([1.0, 2.0])
        assert np.array_equal(perturbed_start(x, np.zeros(2)), x)

    def test_negative_entries_clipped(self):
        x = np.array([3.0, 1.0])
        Y = np.array([-10.0, 0.5])
        assert np.array_equal(perturbed_start(x, Y), [0.0, 1.5])

    def test_constant_truncation(self):
        pspec = PerturbationSpec.constant([1.0, 0.5, 0.25])
        Y = sample_perturbation(pspec, 2, seed=1)
        assert np.array_equal(Y, [1.0, 0.5])

    def test_exp_rates_means(self):
        pspec = PerturbationSpec.exp_rates(1.0)
        rng = np.random.default_rng(3)
        draws = np.stack([sample_perturbation(pspec, 4, rng=rng)
                          for _ in range(100_000)])
        means = draws.mean(axis=0)
        expect = np.array([1.0, 0.25, 1 / 9, 1 / 16])
        se = draws.std(axis=0, ddof=1) / math.sqrt(draws.shape[0])
        assert np.all(np.abs(means - expect) <= 3 * se)

    def test_finite_sampler_support(self):
        pspec = PerturbationSpec.finite(2, "uniform", {"low": 0.0, "high": 1.0},
                                        P1=4.0, P2=math.e, delta=1.0)
        Y = sample_perturbation(pspec, 5, seed=2)
        assert np.all(Y[2:] == 0.0)
        assert np.all((Y[:2] >= 0) & (Y[:2] <= 1))


class TestAlphaY:
    def test_finite_beyond_support_is_zero(self):
        pspec = PerturbationSpec.finite(3, "exponential", {"means": [1, 1, 1]},
                                        P1=50.0, P2=10.0, delta=0.5)
        assert alpha_Y(pspec, 3) == 0.0
        assert alpha_Y(pspec, 7) == 0.0

    def test_constant_tail_sum(self):
        pspec = PerturbationSpec.constant([1.0, 0.5])
        assert alpha_Y(pspec, 1) == pytest.approx(0.5)
        assert alpha_Y(pspec, 0) == pytest.approx(1.5)

    def test_exp_rates_basel_tail(self):
        pspec = PerturbationSpec.exp_rates(1.0)
        assert alpha_Y(pspec, 1) == pytest.approx(math.pi ** 2 / 6 - 1, rel=1e-10)

    def test_non_increasing_to_zero(self):
        for pspec in (PerturbationSpec.exp_rates(1.0),
                      PerturbationSpec.constant([2.0, 1.0, 0.5, 0.25])):
            vals = [alpha_Y(pspec, n) for n in range(0, 40, 4)]
            assert all(b <= a + 1e-12 for a, b in zip(vals, vals[1:]))
            assert vals[-1] < 0.1 * vals[0] + 1e-12

    def test_finite_mc_tail(self):
        pspec = PerturbationSpec.finite(2, "exponential", {"means": [1.0, 0.5]},
                                        P1=20.0, P2=10.0, delta=0.5)
        assert alpha_Y(pspec, 1) == pytest.approx(0.5, rel=0.05)


class TestClassCheck:
    def test_constant_example_constants(self):
        # declared P1 = ||Y||_1^2, P2 = exp(||Y||_inf), delta = 1: exact pass
        pspec = PerturbationSpec.constant([1.0, 0.0])
        rep = class_check(pspec, m_max=50)
        assert rep.P1_ok and rep.P2_ok
        assert rep.P1_estimate == pytest.approx(1.0)
        assert rep.P2_estimate == pytest.approx(math.e)
        assert rep.worst_m == 1

    def test_exp_rates_declared_constants_pass(self):
        pspec = PerturbationSpec.exp_rates(1.0)
        rep = class_check(pspec, m_max=100, n_mc=4000, seed=2)
        assert rep.P1_ok and rep.P2_ok
        assert rep.l1_tail_bound > 0

    def test_zero_perturbation(self):
        pspec = PerturbationSpec.constant([0.0])
        rep = class_check(pspec, m_max=10)
        assert rep.P1_estimate == 0.0
        assert rep.P2_estimate == pytest.approx(1.0)

    def test_understated_constants_flagged(self):
        # delta kept small enough that the exp-moment estimator has finite
        # variance, so the violation is detectable at 3 sigma
        pspec = PerturbationSpec.finite(2, "exponential", {"means": [1.0, 1.0]},
                                        P1=1e-6, P2=1.1, delta=0.25)
        rep = class_check(pspec, m_max=20, n_mc=2000, seed=5)
        assert not rep.P1_ok
        assert rep.P2_ok is False


class TestSchedule:
    def test_exp_rates_power(self):
        pspec = PerturbationSpec.exp_rates(1.0)
        assert n_schedule(pspec, 2.0 ** 32) == 2

    def test_finite_constant_schedule(self):
        pspec = PerturbationSpec.finite(4, "uniform", {}, P1=16.0, P2=3.0, delta=1.0)
        assert n_schedule(pspec, 0.0) == 4
        assert n_schedule(pspec, 1e9) == 4

    def test_floor_clamped_to_one(self):
        pspec = PerturbationSpec.exp_rates(1.0)
        assert n_schedule(pspec, 0.0) == 1
        assert n_schedule(pspec, 1.0) == 1

    def test_constant_defaults_to_support(self):
        pspec = PerturbationSpec.constant([1.0, 0.0, 0.5])
        assert n_schedule(pspec, 10.0) == 2

    def test_constant_custom_schedule_validated(self):
        pspec = PerturbationSpec.constant([1.0], n_func=lambda t: 0)
        with pytest.raises(ValueError):
            n_schedule(pspec, 5.0)

    def test_grid_warnings(self):
        pspec = PerturbationSpec.constant([1.0], n_func=lambda t: int(t) + 1)
        warnings = validate_n_schedule(pspec, [1.0, 10.0, 100.0])
        assert any("t^{-3/32}" in w for w in warnings)
        assert validate_n_schedule(PerturbationSpec.exp_rates(1.0),
                                   [2.0, 10.0, 100.0]) == []


class TestPerturbationJson:
    @pytest.mark.parametrize("pspec", [
        PerturbationSpec.constant([1.0, -0.5, 0.25]),
        PerturbationSpec.finite(3, "exponential", {"means": [1.0, 0.5, 0.2]},
                                P1=20.0, P2=8.0, delta=0.5),
        PerturbationSpec.exp_rates(1.5),
    ])
    def test_round_trip(self, pspec):
        back = PerturbationSpec.from_json_dict(pspec.to_json_dict())
        assert back.kind == pspec.kind
        assert back.P1 == pytest.approx(pspec.P1)
        assert back.P2 == pytest.approx(pspec.P2)
        assert back.delta == pytest.approx(pspec.delta)
        Y1 = sample_perturbation(pspec, 5, seed=3)
        Y2 = sample_perturbation(back, 5, seed=3)
        assert np.array_equal(Y1, Y2)

    def test_unknown_kind_rejected(self):
        with pytest.raises(ValueError):
            PerturbationSpec.from_json_dict({"kind": "mystery"})


class TestBurnin:
    def test_zero_horizon_returns_start(self):
        spec = build_symmetric_atlas(3)
        x = burnin_stationary(spec, 0.0, 0.01, seed=3)
        assert np.allclose(x, 2.0)  # 1 / b_low, b_low = 0.5 for d = 3

    def test_determinism(self):
        spec = build_symmetric_atlas(3)
        a = burnin_stationary(spec, 1.0, 0.01, seed=5)
        b = burnin_stationary(spec, 1.0, 0.01, seed=5)
        assert np.array_equal(a, b)

    def test_rng_injection_matches_ensemble_stream(self):
        spec = build_symmetric_atlas(3)
        rng = np.random.default_rng(np.random.SeedSequence([77, 0]))
        x = burnin_stationary(spec, 1.0, 0.01, rng=rng)
        start = np.full((1, 1, 3), 2.0)
        res = simulate_ensemble(spec, start, T=1.0, h=0.01, master_seed=77)
        assert np.max(np.abs(x - res.final_X[0, 0])) <= 1e-9

    @pytest.mark.slow
    def test_ks_against_exact_sampler(self):
        # burn-in construction vs the exact product-exponential law; the
        # step size keeps the fixed-h reflection offset (O(sqrt(h)) per
        # coordinate) below what a 2000-sample KS resolves
        from scipy.stats import ks_2samp
        d, T_burn, h, n = 3, 50.0, 5e-4, 2000
        spec = build_symmetric_atlas(d)
        start = np.broadcast_to(burnin_stationary(spec, 0.0, h), (n, 1, d))
        res = simulate_ensemble(spec, start, T=T_burn, h=h, master_seed=404)
        burned = res.final_X[:, 0, :]
        rng = np.random.default_rng(11)
        exact = np.stack([sample_atlas_stationary(d, rng=rng) for _ in range(n)])
        for i in range(d):
            p = ks_2samp(burned[:, i], exact[:, i]).pvalue
            assert p > 0.01, f"coordinate {i + 1} differs (p={p:.4f})"
