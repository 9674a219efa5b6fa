"""Bayesian conditional ENFP estimators over positive trials.

Each positive trial contributes G = 1 - h(z) for its designated endpoint
(type A) or the sum of 1 - h(z_j) over endpoints (type B); omega-hat is
the running total of contributions.  The same number serves as the
unconditional bound omega and as the conditional-ENFP estimate given the
observed Z values of the positive trials.

Contributions are computed from h-values frozen at classification time,
so ledger history never changes when the prior is refit; recomputation
against a (possibly newer) model is available separately for audits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Mapping, Optional, Sequence, Tuple

from enfp.hcurve import h_probability
from enfp.trials import FailureRegionType, TrialRecord


@dataclass(frozen=True)
class PositiveTrialResult:
    """Observed z and h values of a trial classified positive.

    Args:
        trial_id: trial identifier.
        m: number of endpoints.
        failure_type: failure region type.
        z_values: observed z per endpoint (length m, endpoint order).
        h_values: h-probability per endpoint, frozen at classification.
        stratum: optional stratum label.
    """

    trial_id: str
    m: int
    failure_type: FailureRegionType
    z_values: Tuple[float, ...]
    h_values: Tuple[float, ...]
    stratum: Optional[str] = None

    def __post_init__(self) -> None:
        zs = tuple(float(z) for z in self.z_values)
        hs = tuple(float(h) for h in self.h_values)
        if len(zs) != self.m or len(hs) != self.m:
            raise ValueError("z_values and h_values must have length m")
        if any(not 0.0 <= h <= 1.0 for h in hs):
            raise ValueError("h_values must lie in [0, 1]")
        object.__setattr__(self, "z_values", zs)
        object.__setattr__(self, "h_values", hs)
        ft = self.failure_type
        if not isinstance(ft, FailureRegionType):
            object.__setattr__(
                self, "failure_type", FailureRegionType(ft)
            )


def positive_result(trial: TrialRecord, model) -> PositiveTrialResult:
    """Freeze a positive trial's (z, h) values against the given model.

    Raises:
        ValueError: if the trial is not classified positive.
    """
    if trial.outcome != "positive":
        raise ValueError(
            f"trial {trial.trial_id} is not classified positive"
        )
    zs = trial.z_values()
    hs = tuple(h_probability(model, z) for z in zs)
    return PositiveTrialResult(
        trial_id=trial.trial_id,
        m=trial.m,
        failure_type=trial.failure_type,
        z_values=zs,
        h_values=hs,
        stratum=trial.stratum,
    )


def recompute_result(
    trial: PositiveTrialResult, model
) -> PositiveTrialResult:
    """Audit utility: re-derive h values from the stored z under a model.

    Returns a new result; the original (with its frozen h values) is
    untouched.
    """
    hs = tuple(h_probability(model, z) for z in trial.z_values)
    return replace(trial, h_values=hs)


def trial_contribution(
    trial: PositiveTrialResult, endpoint_mode: str = "designated"
) -> float:
    """Per-trial contribution G to omega-hat.

    Type A trials are bounded through a single endpoint: the designated
    first endpoint by default, or the maximum-z endpoint when
    ``endpoint_mode="tightest"`` (each endpoint individually bounds the
    null probability, so the largest z gives the smallest valid G).
    Type B trials sum 1 - h over all endpoints.  For m = 1 both reduce
    to 1 - h(z).

    Args:
        trial: a positive trial with frozen h values.
        endpoint_mode: "designated" (endpoint 1) or "tightest" (max z);
            only relevant for type A.

    Returns:
        G >= 0.
    """
    if endpoint_mode not in ("designated", "tightest"):
        raise ValueError(f"unknown endpoint_mode: {endpoint_mode!r}")
    if trial.failure_type is FailureRegionType.A:
        if not trial.h_values:
            raise ValueError(
                f"trial {trial.trial_id}: no endpoint values present"
            )
        if endpoint_mode == "tightest":
            idx = max(
                range(trial.m), key=lambda j: trial.z_values[j]
            )
        else:
            idx = 0
        return 1.0 - trial.h_values[idx]
    return math.fsum(1.0 - h for h in trial.h_values)


def omega_hat(
    positives: Sequence[PositiveTrialResult],
    endpoint_mode: str = "designated",
) -> float:
    """Total Bayesian ENFP bound over positive trials (0 when empty).

    The value reads both as the unconditional bound omega and as the
    conditional expected number of false positives given the observed
    Z values of the positive set.
    """
    return math.fsum(
        trial_contribution(t, endpoint_mode=endpoint_mode)
        for t in positives
    )


def omega_hat_stratified(
    positives_by_stratum: Mapping[str, Sequence[PositiveTrialResult]],
    model_by_stratum: Optional[Mapping[str, object]] = None,
    endpoint_mode: str = "designated",
) -> Tuple[dict, float]:
    """Per-stratum omega-hat and total.

    When ``model_by_stratum`` is given, each stratum's h values are
    recomputed against its own model (audit mode); a stratum without a
    model is an error.  Otherwise the frozen h values are used.

    Returns:
        (per_stratum, total).
    """
    per_stratum = {}
    for label, results in positives_by_stratum.items():
        if model_by_stratum is not None:
            if label not in model_by_stratum:
                raise ValueError(f"missing model for stratum {label!r}")
            model = model_by_stratum[label]
            results = [recompute_result(t, model) for t in results]
        per_stratum[label] = omega_hat(results, endpoint_mode=endpoint_mode)
    return per_stratum, math.fsum(per_stratum.values())
