"""
Error-spending ledgers: ENFP accounting across a trial sequence
===============================================================

The bounds become operational through an append-only ledger.  Two
modes:

* frequentist -- spend happens at PROPOSAL time: a new trial design
  (m, t, alpha) is accepted only if the projected portfolio bound
  tau-hat stays within the budget tau0.  Outcomes are logged for audit
  but cost nothing.
* bayes -- spend happens at OUTCOME time: each positive result adds
  1 - h(z) (its posterior false-positive probability) against omega0.

Every entry is one JSON line; reopening a ledger replays the file and
must reproduce the exact running state.
"""

import tempfile
from pathlib import Path

from enfp import (
    EfficacyMeasure,
    FailureRegionType,
    Ledger,
    PriorModel,
    RejectionPolicy,
    TrialRecord,
    capacity,
    classify_rejection,
)

outdir = Path(tempfile.mkdtemp(prefix="enfp-demo-"))

# ---------------------------------------------------------------------
# Back-of-envelope capacity first
# ---------------------------------------------------------------------
# With every trial at alpha = 0.025 and rho-hat = 0.09, how many trials
# fit inside a budget of one expected false positive?
print(f"capacity(tau0=1, rho=0.09, alpha=0.025)          = "
      f"{capacity(1.0, 0.09, 0.025)}")
print(f"capacity, documented two-step rounding           = "
      f"{capacity(1.0, 0.09, 0.025, mode='rounded')}")

# ---------------------------------------------------------------------
# Frequentist ledger: propose until the budget refuses
# ---------------------------------------------------------------------
freq = Ledger.create(outdir / "freq.jsonl", mode="frequentist",
                     budget=0.05, rho_hat=0.09)
designs = [
    ("trial-01", 1, "B", 0.025),
    ("trial-02", 2, "A", 0.025),
    ("trial-03", 1, "B", 0.05),
    ("trial-04", 3, "B", 0.3),   # greedy design: expect a rejection
    ("trial-05", 1, "B", 0.01),
]
for trial_id, m, t, alpha in designs:
    d = freq.propose(trial_id, m, t, alpha)
    verdict = "accepted" if d.accepted else "REJECTED"
    print(f"  {trial_id} (m={m},{t},alpha={alpha:<6}): {verdict}  "
          f"projected {d.projected:.5f} vs budget {d.budget}")
st = freq.status()
print(f"frequentist spend {st['spent']:.5f}, remaining {st['remaining']:.5f}")

# ---------------------------------------------------------------------
# Bayesian ledger: positives spend 1 - h at their observed z
# ---------------------------------------------------------------------
model = PriorModel.from_masses((-1.0, 2.0), (0.25, 0.75))
bayes = Ledger.create(outdir / "bayes.jsonl", mode="bayes",
                      budget=0.5, model=model)
for trial_id, z in (("out-01", 2.3), ("out-02", 1.2), ("out-03", 3.4)):
    trial = TrialRecord(
        trial_id=trial_id, m=1, failure_type=FailureRegionType.B,
        measures=(EfficacyMeasure(endpoint_index=1, z=z),),
        policy=RejectionPolicy.at_alpha(0.025, 1, FailureRegionType.B),
    )
    trial = trial.with_outcome(classify_rejection(trial))
    rec = bayes.record_outcome(trial, model)
    print(f"  {trial_id}: z={z:4.1f} -> {trial.outcome:8s} "
          f"spend {rec.spend_delta:.5f}, total {rec.spent:.5f}")

# ---------------------------------------------------------------------
# Replay determinism: reopening reproduces the state bit-for-bit
# ---------------------------------------------------------------------
for original, path in ((freq, "freq.jsonl"), (bayes, "bayes.jsonl")):
    replayed = Ledger.open(outdir / path)
    same = (replayed.status() == original.status()
            and replayed.entries() == original.entries())
    print(f"{path}: replay identical = {same}")
    replayed.close()
freq.close()
bayes.close()
print(f"ledger files under {outdir}")

# CLI equivalent:
#   enfp ledger init budget.jsonl --mode freq --budget 0.05 --rho 0.09
#   enfp ledger propose budget.jsonl --trial-id trial-01 --alpha 0.025
#   enfp ledger status budget.jsonl
