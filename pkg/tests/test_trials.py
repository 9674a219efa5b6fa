"""Tests for trial domain types and standardization operations."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from enfp.trials import (
    CannotClassifyError,
    DomainError,
    EfficacyMeasure,
    FailureRegionType,
    InvalidScaleError,
    RejectionPolicy,
    TrialRecord,
    classify_rejection,
    p_to_z,
    standardize,
    z_to_p,
)


def _single_trial(z, critical, trial_id="t1"):
    return TrialRecord(
        trial_id=trial_id,
        m=1,
        failure_type=FailureRegionType.B,
        measures=(EfficacyMeasure(endpoint_index=1, z=z),),
        policy=RejectionPolicy(
            mode="alpha_level",
            per_endpoint_critical_z=(critical,),
            nominal_alpha=0.025,
        ),
    )


class TestStandardize:
    def test_direct_arithmetic(self):
        assert standardize(0.5, 0.0, 0.25) == 2.0

    def test_zero_case(self):
        assert standardize(1.7, 1.7, 0.4) == 0.0

    def test_hand_evaluation(self):
        assert_allclose(standardize(1.3, 0.3, 0.5), 2.0, rtol=0, atol=1e-15)

    def test_invalid_scale(self):
        with pytest.raises(InvalidScaleError):
            standardize(1.0, 0.0, 0.0)
        with pytest.raises(InvalidScaleError):
            standardize(1.0, 0.0, -0.5)


class TestPToZ:
    def test_p005_favorable(self):
        # Frozen oracle: Phi^{-1}(0.975) from the AS241 quantile,
        # cross-checked against the high-precision series oracle in
        # test_special.py.
        assert_allclose(p_to_z(0.05, True), 1.959963984540054, atol=1e-12)

    def test_p_one_is_null_median(self):
        assert p_to_z(1.0, True) == 0.0
        assert p_to_z(1.0, False) == 0.0

    def test_p01_favorable(self):
        assert_allclose(p_to_z(0.1, True), 1.6448536269514722, atol=1e-12)

    def test_unfavorable_flips_sign(self):
        assert p_to_z(0.05, False) == -p_to_z(0.05, True)

    def test_domain_errors(self):
        for bad in (0.0, -0.1, 1.0001, 2.0):
            with pytest.raises(DomainError):
                p_to_z(bad, True)

    def test_round_trip_within_1e10(self):
        ps = np.concatenate(
            [np.geomspace(1e-12, 0.99, 200), np.array([1.0, 0.5, 0.05])]
        )
        for p in ps:
            for favorable in (True, False):
                z = p_to_z(float(p), favorable)
                assert abs(z_to_p(z) - p) < 1e-10


class TestClassifyRejection:
    def test_single_comparison(self):
        assert classify_rejection(_single_trial(2.1, 1.96)) == "positive"
        assert classify_rejection(_single_trial(1.5, 1.96)) == "negative"

    def test_union_null_requires_all_endpoints(self):
        trial = TrialRecord(
            trial_id="b1",
            m=2,
            failure_type=FailureRegionType.B,
            measures=(
                EfficacyMeasure(endpoint_index=1, z=2.5),
                EfficacyMeasure(endpoint_index=2, z=1.0),
            ),
            policy=RejectionPolicy(
                mode="alpha_level",
                per_endpoint_critical_z=(1.96, 1.96),
                nominal_alpha=0.05,
            ),
        )
        assert classify_rejection(trial) == "negative"

    def test_intersection_null_any_endpoint(self):
        trial = TrialRecord(
            trial_id="a1",
            m=2,
            failure_type=FailureRegionType.A,
            measures=(
                EfficacyMeasure(endpoint_index=1, z=2.5),
                EfficacyMeasure(endpoint_index=2, z=1.0),
            ),
            policy=RejectionPolicy(
                mode="alpha_level",
                per_endpoint_critical_z=(2.24, 2.24),
                nominal_alpha=0.025,
            ),
        )
        assert classify_rejection(trial) == "positive"

    def test_bonferroni_adjustment_matches_quantile_oracle(self):
        policy = RejectionPolicy.at_alpha(0.025, 2, FailureRegionType.A)
        # Frozen: Phi^{-1}(1 - 0.0125), verified against the series oracle.
        assert_allclose(
            policy.per_endpoint_critical_z,
            (2.2414027276049473, 2.2414027276049473),
            atol=1e-12,
        )
        policy_b = RejectionPolicy.at_alpha(0.025, 2, FailureRegionType.B)
        assert_allclose(
            policy_b.per_endpoint_critical_z,
            (1.959963984540054, 1.959963984540054),
            atol=1e-12,
        )

    def test_censored_measure_cannot_classify(self):
        trial = TrialRecord(
            trial_id="c1",
            m=1,
            failure_type=FailureRegionType.B,
            measures=(EfficacyMeasure.censored_at_p(1, 0.05),),
            policy=RejectionPolicy(
                mode="alpha_level",
                per_endpoint_critical_z=(1.96,),
                nominal_alpha=0.025,
            ),
        )
        with pytest.raises(CannotClassifyError):
            classify_rejection(trial)

    def test_m1_typing_normalized_to_b(self):
        trial = TrialRecord(
            trial_id="n1",
            m=1,
            failure_type=FailureRegionType.A,
            measures=(EfficacyMeasure(endpoint_index=1, z=2.1),),
            policy=RejectionPolicy(
                mode="alpha_level",
                per_endpoint_critical_z=(1.96,),
                nominal_alpha=0.025,
            ),
        )
        assert trial.failure_type is FailureRegionType.B
        assert classify_rejection(trial) == "positive"

    def test_type_b_weakening_monotonicity(self):
        rng = np.random.default_rng(42)
        for _ in range(200):
            m = int(rng.integers(1, 4))
            zs = rng.normal(1.5, 1.0, size=m)
            crits = rng.normal(1.5, 0.5, size=m)
            measures = tuple(
                EfficacyMeasure(endpoint_index=j + 1, z=float(zs[j]))
                for j in range(m)
            )

            def outcome(criticals):
                trial = TrialRecord(
                    trial_id="mono",
                    m=m,
                    failure_type=FailureRegionType.B,
                    measures=measures,
                    policy=RejectionPolicy(
                        mode="alpha_level",
                        per_endpoint_critical_z=tuple(criticals),
                        nominal_alpha=0.025,
                    ),
                )
                return classify_rejection(trial)

            base = outcome(crits)
            weakened = crits.copy()
            j = int(rng.integers(0, m))
            weakened[j] -= float(rng.uniform(0.1, 2.0))
            after = outcome(weakened)
            if base == "positive":
                assert after == "positive"


class TestDomainTypes:
    def test_measure_requires_exactly_one_of_z_and_interval(self):
        with pytest.raises(ValueError):
            EfficacyMeasure(endpoint_index=1)
        with pytest.raises(ValueError):
            EfficacyMeasure(
                endpoint_index=1, z=1.0, censor_interval=(-1.0, 1.0)
            )

    def test_interval_must_be_ordered(self):
        with pytest.raises(ValueError):
            EfficacyMeasure(endpoint_index=1, censor_interval=(1.0, -1.0))

    def test_censored_at_p_symmetric_band(self):
        meas = EfficacyMeasure.censored_at_p(1, 0.05)
        low, high = meas.censor_interval
        assert_allclose(high, 1.959963984540054, atol=1e-12)
        assert low == -high
        assert meas.censor_p == 0.05

    def test_record_enforces_measure_count_and_indices(self):
        policy = RejectionPolicy.at_alpha(0.025, 2, FailureRegionType.B)
        with pytest.raises(ValueError):
            TrialRecord(
                trial_id="bad",
                m=2,
                failure_type=FailureRegionType.B,
                measures=(EfficacyMeasure(endpoint_index=1, z=1.0),),
                policy=policy,
            )
        with pytest.raises(ValueError):
            TrialRecord(
                trial_id="bad2",
                m=2,
                failure_type=FailureRegionType.B,
                measures=(
                    EfficacyMeasure(endpoint_index=1, z=1.0),
                    EfficacyMeasure(endpoint_index=3, z=1.0),
                ),
                policy=policy,
            )

    def test_policy_mode_contracts(self):
        with pytest.raises(ValueError):
            RejectionPolicy(mode="alpha_level", nominal_alpha=0.05)
        with pytest.raises(ValueError):
            RejectionPolicy(mode="h_threshold")
        with pytest.raises(ValueError):
            RejectionPolicy(mode="bogus")
        pol = RejectionPolicy.at_h_floor(0.975)
        assert pol.h_floor == 0.975

    def test_from_p_conversion(self):
        meas = EfficacyMeasure.from_p(1, 0.05, True)
        assert_allclose(meas.z, 1.959963984540054, atol=1e-12)
        meas_neg = EfficacyMeasure.from_p(1, 0.05, False)
        assert meas_neg.z == -meas.z
