"""Domain types for randomized trials and standardization of raw results.

A trial is described by its efficacy measures (one standardized Z statistic
per endpoint, or an interval when the exact value is censored), a failure
region type, and the rejection policy the investigators chose before
unblinding.  Everything downstream (prior estimation, h-probabilities,
error accounting) consumes these value objects.

All types are immutable after construction and safe to share across
threads.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

from enfp.special import norm_cdf, norm_ppf


class InvalidScaleError(ValueError):
    """Raised when a scale parameter (sigma) is not strictly positive."""


class DomainError(ValueError):
    """Raised when a probability argument falls outside its legal range."""


class CannotClassifyError(ValueError):
    """Raised when a trial cannot be classified (e.g. censored endpoints)."""


class FailureRegionType(enum.Enum):
    """Type of the null (failure) region in effect-size space.

    Type A is the intersection null (all endpoints null); type B is the
    union null (any endpoint null).  Single-endpoint trials are typed B
    by convention -- the two coincide at m = 1.
    """

    A = "A"
    B = "B"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class EfficacyMeasure:
    """One endpoint's standardized result.

    Exactly one of ``z`` and ``censor_interval`` is present.  A censored
    measure records only that Z fell inside an interval, typically the
    two-sided non-significance band |Z| < z0 when all that is known is
    p >= p0.

    Args:
        endpoint_index: 1-based endpoint position within the trial.
        z: observed standardized statistic, if exact.
        censor_interval: (low, high) bounds in z-space, if censored.
        direction_favorable: whether the point estimate favored the
            intervention; used when converting two-sided p-values.
        censor_p: the two-sided p-value threshold that produced
            ``censor_interval``, when the censoring came from a p-value
            cutoff.  Kept so serialized records round-trip losslessly.
    """

    endpoint_index: int
    z: Optional[float] = None
    censor_interval: Optional[Tuple[float, float]] = None
    direction_favorable: bool = True
    censor_p: Optional[float] = None

    def __post_init__(self) -> None:
        if self.endpoint_index < 1:
            raise ValueError("endpoint_index must be >= 1")
        if (self.z is None) == (self.censor_interval is None):
            raise ValueError(
                "exactly one of z and censor_interval must be present"
            )
        if self.censor_interval is not None:
            low, high = self.censor_interval
            if not low < high:
                raise ValueError("censor_interval must satisfy low < high")
            object.__setattr__(self, "censor_interval", (float(low), float(high)))
        if self.z is not None:
            object.__setattr__(self, "z", float(self.z))

    @property
    def censored(self) -> bool:
        return self.censor_interval is not None

    @classmethod
    def from_p(
        cls, endpoint_index: int, p_two_sided: float, direction_favorable: bool
    ) -> "EfficacyMeasure":
        """Build an exact measure from a two-sided p-value."""
        z = p_to_z(p_two_sided, direction_favorable)
        return cls(
            endpoint_index=endpoint_index,
            z=z,
            direction_favorable=direction_favorable,
        )

    @classmethod
    def censored_at_p(
        cls, endpoint_index: int, p_threshold: float = 0.05
    ) -> "EfficacyMeasure":
        """Build a censored measure knowing only that p >= p_threshold.

        The resulting interval is the symmetric band |Z| < z0 with
        z0 = the two-sided critical value at p_threshold.
        """
        if not 0.0 < p_threshold < 1.0:
            raise DomainError("p_threshold must lie in (0, 1)")
        z0 = float(norm_ppf(1.0 - p_threshold / 2.0))
        return cls(
            endpoint_index=endpoint_index,
            censor_interval=(-z0, z0),
            censor_p=float(p_threshold),
        )


@dataclass(frozen=True)
class RejectionPolicy:
    """How a trial decides "positive": alpha level or h-probability floor.

    In ``alpha_level`` mode the per-endpoint critical values must already
    be multiplicity-adjusted so that the trial-level type I error is
    ``nominal_alpha``; use :meth:`at_alpha` to get the standard
    adjustment.  In ``h_threshold`` mode the trial is judged by whether
    the posterior h-probability clears ``h_floor``, which requires a
    fitted prior model at classification time.
    """

    mode: str
    per_endpoint_critical_z: Tuple[float, ...] = ()
    nominal_alpha: Optional[float] = None
    h_floor: Optional[float] = None

    def __post_init__(self) -> None:
        if self.mode not in ("alpha_level", "h_threshold"):
            raise ValueError(f"unknown policy mode: {self.mode!r}")
        if self.mode == "alpha_level":
            if self.nominal_alpha is None:
                raise ValueError("alpha_level mode requires nominal_alpha")
            if not 0.0 < self.nominal_alpha < 1.0:
                raise DomainError("nominal_alpha must lie in (0, 1)")
            if not self.per_endpoint_critical_z:
                raise ValueError(
                    "alpha_level mode requires per_endpoint_critical_z"
                )
        else:
            if self.h_floor is None:
                raise ValueError("h_threshold mode requires h_floor")
            if not 0.0 < self.h_floor < 1.0:
                raise DomainError("h_floor must lie in (0, 1)")
        object.__setattr__(
            self,
            "per_endpoint_critical_z",
            tuple(float(c) for c in self.per_endpoint_critical_z),
        )

    @classmethod
    def at_alpha(
        cls, alpha: float, m: int, failure_type: FailureRegionType
    ) -> "RejectionPolicy":
        """Standard multiplicity adjustment for a trial-level alpha.

        Type A (any-endpoint rejection) splits alpha across endpoints,
        Bonferroni style: each critical value is the one-sided normal
        quantile at alpha / m.  Type B (all-endpoint rejection, an
        intersection-union test) keeps level alpha per endpoint.

        Args:
            alpha: trial-level one-sided type I error rate.
            m: number of endpoints.
            failure_type: failure region type of the trial.

        Returns:
            An alpha_level RejectionPolicy with m critical values.
        """
        if not 0.0 < alpha < 1.0:
            raise DomainError("alpha must lie in (0, 1)")
        if m < 1:
            raise ValueError("m must be >= 1")
        per = alpha / m if failure_type is FailureRegionType.A else alpha
        crit = float(norm_ppf(1.0 - per))
        return cls(
            mode="alpha_level",
            per_endpoint_critical_z=(crit,) * m,
            nominal_alpha=float(alpha),
        )

    @classmethod
    def at_h_floor(cls, h_floor: float) -> "RejectionPolicy":
        return cls(mode="h_threshold", h_floor=float(h_floor))


@dataclass(frozen=True)
class TrialRecord:
    """A single trial: endpoints, failure type, policy, optional outcome.

    Invariants enforced at construction: ``measures`` has length ``m``
    with endpoint indices 1..m and no gaps; single-endpoint trials are
    normalized to failure type B (the two types coincide at m = 1).
    """

    trial_id: str
    m: int
    failure_type: FailureRegionType
    measures: Tuple[EfficacyMeasure, ...]
    policy: RejectionPolicy
    stratum: Optional[str] = None
    outcome: Optional[str] = None

    def __post_init__(self) -> None:
        if self.m < 1:
            raise ValueError("m must be >= 1")
        measures = tuple(self.measures)
        object.__setattr__(self, "measures", measures)
        if len(measures) != self.m:
            raise ValueError(
                f"expected {self.m} measures, got {len(measures)}"
            )
        indices = sorted(meas.endpoint_index for meas in measures)
        if indices != list(range(1, self.m + 1)):
            raise ValueError("endpoint_index values must be 1..m without gaps")
        if self.m == 1 and self.failure_type is FailureRegionType.A:
            object.__setattr__(self, "failure_type", FailureRegionType.B)
        if (
            self.policy.mode == "alpha_level"
            and len(self.policy.per_endpoint_critical_z) != self.m
        ):
            raise ValueError("policy critical values must match m")
        if self.outcome is not None and self.outcome not in (
            "positive",
            "negative",
        ):
            raise ValueError(f"unknown outcome: {self.outcome!r}")

    @property
    def fully_observed(self) -> bool:
        return all(not meas.censored for meas in self.measures)

    def z_values(self) -> Tuple[float, ...]:
        """Observed z per endpoint, in endpoint order.

        Raises:
            CannotClassifyError: if any endpoint is censored.
        """
        out = []
        for meas in sorted(self.measures, key=lambda m_: m_.endpoint_index):
            if meas.censored:
                raise CannotClassifyError(
                    f"trial {self.trial_id}: endpoint "
                    f"{meas.endpoint_index} is censored"
                )
            out.append(meas.z)
        return tuple(out)

    def with_outcome(self, outcome: str) -> "TrialRecord":
        return TrialRecord(
            trial_id=self.trial_id,
            m=self.m,
            failure_type=self.failure_type,
            measures=self.measures,
            policy=self.policy,
            stratum=self.stratum,
            outcome=outcome,
        )


def standardize(beta_hat: float, c: float, sigma: float) -> float:
    """Standardize an efficacy estimate: z = (beta_hat - c) / sigma.

    Args:
        beta_hat: estimated efficacy measure.
        c: null threshold for the measure.
        sigma: standard error of the estimate; must be > 0.

    Returns:
        The standardized statistic.

    Raises:
        InvalidScaleError: if sigma <= 0.
    """
    if sigma <= 0.0:
        raise InvalidScaleError(f"sigma must be > 0, got {sigma}")
    return (beta_hat - c) / sigma


def p_to_z(p_two_sided: float, direction_favorable: bool) -> float:
    """Convert a two-sided p-value to a signed Z statistic.

    z = sign * Phi^{-1}(1 - p/2), with sign +1 when the point estimate
    favored the intervention and -1 otherwise.

    Raises:
        DomainError: if p lies outside (0, 1].
    """
    if not 0.0 < p_two_sided <= 1.0:
        raise DomainError(f"p must lie in (0, 1], got {p_two_sided}")
    magnitude = float(norm_ppf(1.0 - p_two_sided / 2.0))
    return magnitude if direction_favorable else -magnitude


def z_to_p(z: float) -> float:
    """Two-sided p-value of a Z statistic: 2(1 - Phi(|z|))."""
    return float(2.0 * (1.0 - norm_cdf(abs(z))))


def classify_rejection(trial: TrialRecord, model=None) -> str:
    """Classify a fully observed trial as positive or negative.

    Type A (intersection null) rejects when ANY endpoint's z exceeds its
    critical value; type B (union null) rejects only when EVERY endpoint
    exceeds its critical value (an intersection-union test).

    For an h_threshold policy the critical value is derived from the
    fitted prior: the smallest z whose h-probability reaches the policy
    floor.  ``model`` must then be supplied.

    Args:
        trial: the trial to classify; all endpoints must be observed.
        model: PriorModel, required only for h_threshold policies.

    Returns:
        "positive" or "negative".

    Raises:
        CannotClassifyError: if any endpoint is censored.
        ValueError: if an h_threshold policy is used without a model.
    """
    zs = trial.z_values()
    if trial.policy.mode == "h_threshold":
        if model is None:
            raise ValueError(
                "h_threshold policy requires a PriorModel to classify"
            )
        from enfp.hcurve import z_for_h

        crit = z_for_h(model, trial.policy.h_floor)
        criticals = (crit,) * trial.m
    else:
        criticals = trial.policy.per_endpoint_critical_z

    exceed = [z > c for z, c in zip(zs, criticals)]
    if trial.failure_type is FailureRegionType.A:
        return "positive" if any(exceed) else "negative"
    return "positive" if all(exceed) else "negative"
