"""
Trial records: standardization, rejection policies, serialization
=================================================================

Every analysis in this package starts from TrialRecord objects: one
record per trial, one efficacy measure per endpoint, plus the rejection
policy the sponsor committed to.  This script builds a small portfolio
by hand, classifies outcomes, and round-trips the records through CSV
and JSON.
"""

import tempfile
from pathlib import Path

from enfp import (
    EfficacyMeasure,
    FailureRegionType,
    RejectionPolicy,
    TrialRecord,
    classify_rejection,
    load_records,
    p_to_z,
    save_records,
    standardize,
)

# ---------------------------------------------------------------------
# From raw trial summaries to standardized Z statistics
# ---------------------------------------------------------------------
# A trial reports an efficacy estimate beta-hat, a null threshold c,
# and a standard error sigma; the effect size is theta = (beta - c) /
# sigma and the observed statistic is Z = (beta-hat - c) / sigma.
z1 = standardize(beta_hat=4.2, c=1.0, sigma=1.5)
print(f"standardize(4.2, 1.0, 1.5)       -> z = {z1:.4f}")

# Results published only as a two-sided p-value convert through the
# favorable/unfavorable direction flag.
z2 = p_to_z(0.012, direction_favorable=True)
print(f"p_to_z(0.012, favorable)         -> z = {z2:.4f}")

# ---------------------------------------------------------------------
# Records: single- and multi-endpoint trials
# ---------------------------------------------------------------------
single = TrialRecord(
    trial_id="NCT-0001",
    m=1,
    failure_type=FailureRegionType.B,
    measures=(EfficacyMeasure(endpoint_index=1, z=z1),),
    policy=RejectionPolicy.at_alpha(0.025, 1, FailureRegionType.B),
)

# Type A fails only if EVERY endpoint is null (any-endpoint rejection,
# Bonferroni-split alpha); type B fails if ANY endpoint is null
# (all-endpoint rejection, full alpha per endpoint).
dual = TrialRecord(
    trial_id="NCT-0002",
    m=2,
    failure_type=FailureRegionType.A,
    measures=(
        EfficacyMeasure(endpoint_index=1, z=2.41),
        EfficacyMeasure(endpoint_index=2, z=1.05),
    ),
    policy=RejectionPolicy.at_alpha(0.025, 2, FailureRegionType.A),
    stratum="cardio",
)

# A trial known only as "not significant at p = 0.05": the measure is
# interval-censored to the symmetric band |Z| < 1.96.
shelved = TrialRecord(
    trial_id="NCT-0003",
    m=1,
    failure_type=FailureRegionType.B,
    measures=(EfficacyMeasure.censored_at_p(1, 0.05),),
    policy=RejectionPolicy.at_alpha(0.025, 1, FailureRegionType.B),
)

for trial in (single, dual):
    outcome = classify_rejection(trial)
    print(f"{trial.trial_id}: m={trial.m} type {trial.failure_type.value}"
          f" -> {outcome}")
print(f"{shelved.trial_id}: censored to |Z| < "
      f"{shelved.measures[0].censor_interval[1]:.4f} (no classification)")

# ---------------------------------------------------------------------
# Serialization: CSV for flat pipelines, JSON for full fidelity
# ---------------------------------------------------------------------
records = (single, dual, shelved)
outdir = Path(tempfile.mkdtemp(prefix="enfp-demo-"))
for name in ("portfolio.csv", "portfolio.json"):
    save_records(records, outdir / name)
    back = load_records(outdir / name)
    print(f"{name}: round-trip intact = {back == records}")
print(f"files written under {outdir}")

# The CLI wraps the same machinery:
#   enfp synth --out corpus.csv        (synthetic corpus generator)
#   enfp fit corpus.csv                (reads either format)
