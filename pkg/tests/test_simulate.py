"""Tests for the Monte Carlo simulator and its oracle diagnostics."""

import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from enfp.bayes_bounds import omega_hat, positive_result
from enfp.freq_bounds import FreqBoundInput, tau_hat_mixed
from enfp.simulate import (
    PolicySpec,
    ScenarioConfig,
    _omega_hat_arrays,
    _tau_hat_arrays,
    check_concordance,
    draw_population,
    oracle_count_fp,
    rho_from_prior,
    simulate_population,
    validate_bounds,
)
from enfp.special import norm_cdf, norm_ppf
from enfp.trials import (
    EfficacyMeasure,
    FailureRegionType,
    RejectionPolicy,
    TrialRecord,
    classify_rejection,
)

A = FailureRegionType.A
B = FailureRegionType.B


def delta_prior(theta):
    return ((theta,), (1.0,))


def fixed_policy(alpha=0.025):
    return PolicySpec(kind="fixed_alpha", alpha_menu=(alpha,))


MIXED_PRIOR = (
    (-2.0, -0.5, 0.0, 1.0, 2.5, 3.5),
    (0.08, 0.07, 0.05, 0.3, 0.3, 0.2),
)


def mixed_scenario(**overrides):
    base = dict(
        true_prior=MIXED_PRIOR,
        n_trials=20_000,
        m_distribution=((1, B, 0.4), (2, A, 0.2), (2, B, 0.2), (3, B, 0.2)),
        policy=PolicySpec(
            kind="signal_concordant",
            alpha_menu=(0.005, 0.01, 0.025, 0.05),
            signal_noise=1.0,
        ),
        seed=42,
        replicates=4,
    )
    base.update(overrides)
    return ScenarioConfig(**base)


class TestCalibration:
    def test_null_rejection_rate(self):
        # theta == 0, m=1, fixed alpha: rejection rate == alpha.
        cfg = ScenarioConfig(
            true_prior=delta_prior(0.0),
            n_trials=1_000_000,
            m_distribution=((1, B, 1.0),),
            policy=fixed_policy(0.025),
            seed=101,
        )
        draw = draw_population(cfg)
        rate = draw.positive.mean()
        se = math.sqrt(0.025 * 0.975 / cfg.n_trials)
        assert abs(rate - 0.025) <= 3 * se

    def test_menu_calibration_every_alpha(self):
        cfg = ScenarioConfig(
            true_prior=delta_prior(0.0),
            n_trials=400_000,
            m_distribution=((1, B, 1.0),),
            policy=PolicySpec(
                kind="fixed_alpha", alpha_menu=(0.01, 0.025, 0.05)
            ),
            seed=7,
        )
        draw = draw_population(cfg)
        for alpha in (0.01, 0.025, 0.05):
            mask = draw.alpha == alpha
            rate = draw.positive[mask].mean()
            se = math.sqrt(alpha * (1 - alpha) / mask.sum())
            assert abs(rate - alpha) <= 3 * se

    def test_strong_effect_power(self):
        # theta == 5: positive fraction ~= Phi(5 - z_crit) ~= 0.9988.
        cfg = ScenarioConfig(
            true_prior=delta_prior(5.0),
            n_trials=200_000,
            m_distribution=((1, B, 1.0),),
            policy=fixed_policy(0.025),
            seed=11,
        )
        rate = draw_population(cfg).positive.mean()
        expected = float(norm_cdf(5.0 - norm_ppf(0.975)))
        assert_allclose(expected, 0.9988, atol=5e-5)
        se = math.sqrt(expected * (1 - expected) / cfg.n_trials)
        assert abs(rate - expected) <= 3 * se

    def test_independent_endpoints_multiply(self):
        # m=2 type B, theta=(0,0), alpha=0.05, rc=0: both endpoints must
        # clear Phi^-1(0.95), so the positive rate is 0.05^2 = 0.0025.
        cfg = ScenarioConfig(
            true_prior=delta_prior(0.0),
            n_trials=400_000,
            m_distribution=((2, B, 1.0),),
            policy=fixed_policy(0.05),
            seed=17,
            endpoint_correlation=0.0,
        )
        rate = draw_population(cfg).positive.mean()
        se = math.sqrt(0.0025 * 0.9975 / cfg.n_trials)
        assert abs(rate - 0.0025) <= 3 * se

    def test_endpoint_correlation_realized(self):
        cfg = ScenarioConfig(
            true_prior=delta_prior(0.0),
            n_trials=200_000,
            m_distribution=((2, B, 1.0),),
            policy=fixed_policy(),
            seed=23,
            endpoint_correlation=0.8,
        )
        z = draw_population(cfg).z
        corr = np.corrcoef(z[:, 0], z[:, 1])[0, 1]
        assert abs(corr - 0.8) < 0.01


class TestDrawShape:
    def test_padding_and_masks(self):
        draw = draw_population(mixed_scenario(n_trials=5000))
        assert draw.z.shape == (5000, 3)
        for i in (0, 17, 4999):
            m = draw.m[i]
            assert np.all(np.isfinite(draw.z[i, :m]))
            assert np.all(np.isnan(draw.z[i, m:]))
            assert np.all(draw.valid[i, :m]) and not np.any(draw.valid[i, m:])

    def test_determinism(self):
        cfg = mixed_scenario(n_trials=2000)
        a = draw_population(cfg, replicate=1)
        b = draw_population(cfg, replicate=1)
        assert np.array_equal(a.z, b.z, equal_nan=True)
        assert np.array_equal(a.alpha, b.alpha)
        assert np.array_equal(a.positive, b.positive)
        c = draw_population(cfg, replicate=2)
        assert not np.array_equal(a.z, c.z, equal_nan=True)

    def test_m1_type_a_normalized(self):
        cfg = mixed_scenario(
            m_distribution=((1, A, 0.5), (1, B, 0.5)), n_trials=10
        )
        assert cfg.m_distribution == ((1, B, 1.0),)

    def test_classifier_agreement_with_trial_model(self):
        records = simulate_population(mixed_scenario(n_trials=400))
        for record, _theta in records:
            assert classify_rejection(record) == record.outcome


class TestOracleCount:
    def test_hand_built_count(self):
        def rec(tid, t, zs, outcome):
            m = len(zs)
            return TrialRecord(
                trial_id=tid,
                m=m,
                failure_type=t,
                measures=tuple(
                    EfficacyMeasure(endpoint_index=i + 1, z=z)
                    for i, z in enumerate(zs)
                ),
                policy=RejectionPolicy.at_alpha(0.025, m=m, failure_type=t),
                outcome=outcome,
            )

        population = [
            # positive, type B with one null endpoint -> false positive
            (rec("t1", B, [2.5, 2.2], "positive"), (-0.5, 1.0)),
            # positive, type A with all endpoints null -> false positive
            (rec("t2", A, [2.1, 1.0], "positive"), (0.0, -1.0)),
            # positive, truly effective -> not a false positive
            (rec("t3", B, [3.0], "positive"), (2.0,)),
            # null but negative -> not a false positive
            (rec("t4", B, [0.3], "negative"), (-1.0,)),
        ]
        assert oracle_count_fp(population) == 2

    def test_no_null_trials(self):
        cfg = mixed_scenario(
            true_prior=((1.0, 3.0), (0.5, 0.5)), n_trials=5000, replicates=1
        )
        draw = draw_population(cfg)
        assert oracle_count_fp(draw) == 0

    def test_saturation(self):
        cfg = ScenarioConfig(
            true_prior=delta_prior(-1.0),
            n_trials=200,
            m_distribution=((1, B, 1.0),),
            policy=PolicySpec(kind="fixed_alpha", alpha_menu=(0.999,)),
            seed=3,
        )
        draw = draw_population(cfg)
        assert oracle_count_fp(draw) == int(draw.positive.sum())

    def test_array_and_record_paths_agree(self):
        cfg = mixed_scenario(n_trials=800)
        draw = draw_population(cfg)
        assert oracle_count_fp(draw) == oracle_count_fp(draw.to_records())


class TestConcordance:
    def test_fixed_alpha_passes_with_equality(self):
        cfg = mixed_scenario(policy=fixed_policy(), n_trials=30_000)
        report = check_concordance(draw_population(cfg))
        assert report.first.passed and report.second.passed
        assert report.first.mean_null == report.first.mean_nonnull
        assert report.passed

    def test_signal_concordant_passes_with_strict_ordering(self):
        cfg = mixed_scenario(n_trials=100_000, replicates=1)
        report = check_concordance(draw_population(cfg))
        assert report.first.mean_null < report.first.mean_nonnull
        assert report.second.mean_null < report.second.mean_nonnull
        assert report.passed

    def test_adversarial_flagged(self):
        cfg = mixed_scenario(n_trials=100_000, replicates=1)
        adv = mixed_scenario(
            n_trials=100_000,
            replicates=1,
            policy=PolicySpec(
                kind="adversarial",
                alpha_menu=(0.005, 0.01, 0.025, 0.05),
                signal_noise=1.0,
            ),
            seed=cfg.seed,
        )
        report = check_concordance(draw_population(adv))
        assert not report.first.passed
        assert not report.passed

    def test_one_class_bins_skipped(self):
        # Huge effects: every trial positive, so every z bin has one class
        # and the binned checks must skip rather than judge.
        cfg = ScenarioConfig(
            true_prior=delta_prior(8.0),
            n_trials=4000,
            m_distribution=((1, B, 1.0),),
            policy=fixed_policy(),
            seed=5,
        )
        report = check_concordance(draw_population(cfg))
        assert report.third.n_bins_checked == 0
        assert report.third.n_bins_skipped > 0
        assert report.third.passed  # vacuous, not a failure


class TestVectorizedBounds:
    def test_tau_matches_reference(self):
        draw = draw_population(mixed_scenario(n_trials=600))
        rho = 0.13
        trials = tuple(
            (int(m), A if a else B, float(al))
            for m, a, al in zip(draw.m, draw.is_type_a, draw.alpha)
        )
        reference = tau_hat_mixed(FreqBoundInput(rho_hat=rho, trials=trials))
        assert_allclose(_tau_hat_arrays(rho, draw), reference, rtol=1e-12)

    def test_omega_matches_reference(self):
        cfg = mixed_scenario(n_trials=600)
        draw = draw_population(cfg)
        model = cfg.prior_model()
        frozen = [
            positive_result(record, model)
            for record, _ in draw.to_records()
            if record.outcome == "positive"
        ]
        for mode in ("designated", "tightest"):
            reference = omega_hat(frozen, endpoint_mode=mode)
            assert_allclose(
                _omega_hat_arrays(model, draw, mode), reference, rtol=1e-12
            )


class TestValidateBounds:
    def test_concordant_scenario_no_violations(self):
        report = validate_bounds(mixed_scenario())
        assert not report.bound_violations["tau"]
        assert not report.bound_violations["omega"]
        assert report.concordance.passed
        assert report.realized_fp_se > 0

    def test_bound_chain_single_endpoint(self):
        # realized FP <= omega-hat <= tau-hat for all-(1,B) portfolios:
        # omega uses the actual negative-theta mass while tau prices
        # every null at theta = 0, so omega sits between.
        cfg = mixed_scenario(
            true_prior=((-1.5, -0.5, 1.0, 2.5), (0.1, 0.1, 0.5, 0.3)),
            m_distribution=((1, B, 1.0),),
            n_trials=50_000,
            replicates=4,
        )
        report = validate_bounds(cfg)
        se = max(report.realized_fp_se, 1.0)
        assert report.realized_fp_mean <= report.omega_hat_mean + 3 * se
        assert report.omega_hat_mean <= report.tau_hat_mean + 3 * report.omega_hat_se
        assert not report.bound_violations["omega"]

    def test_rho_zero_scenario(self):
        cfg = mixed_scenario(
            true_prior=((0.5, 2.0), (0.4, 0.6)), replicates=2
        )
        assert rho_from_prior(cfg) == 0.0
        report = validate_bounds(cfg)
        assert report.realized_fp_mean == 0.0
        assert report.tau_hat_mean == 0.0
        assert not report.bound_violations["tau"]

    def test_adversarial_reported_not_suppressed(self):
        cfg = mixed_scenario(
            policy=PolicySpec(
                kind="adversarial",
                alpha_menu=(0.001, 0.3),
                signal_noise=0.5,
            ),
            n_trials=50_000,
            replicates=3,
        )
        report = validate_bounds(cfg)
        assert not report.concordance.first.passed
        assert set(report.bound_violations) == {"tau", "omega"}

    def test_determinism(self):
        cfg = mixed_scenario(n_trials=5000, replicates=2)
        assert validate_bounds(cfg).to_dict() == validate_bounds(cfg).to_dict()

    def test_table_smoke(self):
        table = validate_bounds(mixed_scenario(n_trials=2000, replicates=2)).table()
        assert "tau-hat" in table and "omega-hat" in table


class TestScenarioIO:
    def test_json_round_trip(self):
        cfg = mixed_scenario()
        again = ScenarioConfig.from_json(cfg.to_json())
        assert again == cfg

    def test_format_tag_checked(self):
        data = mixed_scenario().to_dict()
        data["format"] = "other/1"
        with pytest.raises(ValueError):
            ScenarioConfig.from_dict(data)

    def test_validation_errors(self):
        good = dict(
            true_prior=delta_prior(0.0),
            n_trials=10,
            m_distribution=((1, B, 1.0),),
            policy=fixed_policy(),
            seed=1,
        )
        with pytest.raises(ValueError):
            ScenarioConfig(**{**good, "endpoint_correlation": 1.0})
        with pytest.raises(ValueError):
            ScenarioConfig(**{**good, "n_trials": 0})
        with pytest.raises(ValueError):
            ScenarioConfig(**{**good, "seed": "abc"})
        with pytest.raises(ValueError):
            ScenarioConfig(**{**good, "true_prior": ((0.0,), (-1.0,))})
        with pytest.raises(ValueError):
            ScenarioConfig(**{**good, "m_distribution": ((0, B, 1.0),)})
        with pytest.raises(ValueError):
            PolicySpec(kind="bogus")
        with pytest.raises(ValueError):
            PolicySpec(kind="fixed_alpha", alpha_menu=())
        with pytest.raises(ValueError):
            PolicySpec(kind="fixed_alpha", alpha_menu=(0.0,))
        with pytest.raises(ValueError):
            PolicySpec(kind="signal_concordant", signal_noise=-1.0)

    def test_prior_mass_normalized(self):
        cfg = mixed_scenario(true_prior=((-1.0, 2.0), (1.0, 3.0)))
        assert_allclose(cfg.true_prior[1], (0.25, 0.75), atol=1e-15)
        assert_allclose(rho_from_prior(cfg), 0.25, atol=1e-15)
