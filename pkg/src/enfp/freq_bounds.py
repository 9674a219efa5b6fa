"""Frequentist ENFP upper bounds: tau-hat estimators and trial capacity.

The population-level expected number of false positives over N trials is
bounded by tau = (1/N) (sum_i delta(rho, m_i, t_i)) (sum_i alpha_i),
the product-of-sums form; with all single-endpoint trials this reduces
to rho * sum(alpha_i).  All functions here are pure arithmetic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Optional, Sequence, Tuple, Union

from enfp.trials import FailureRegionType

# Relative slack used when flooring capacity ratios: guards against
# quotients like 0.99 / (0.09 * 0.025) landing one ulp below an integer.
_FLOOR_SLACK = 1e-12


@dataclass(frozen=True)
class TrialSpec:
    """Design summary of one trial: endpoint count, type, alpha level."""

    m: int
    t: FailureRegionType
    alpha: float

    def __post_init__(self) -> None:
        if self.m < 1:
            raise ValueError("m must be >= 1")
        if not isinstance(self.t, FailureRegionType):
            object.__setattr__(self, "t", FailureRegionType(self.t))
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must lie in (0,1), got {self.alpha}")


SpecLike = Union[TrialSpec, Tuple]


def _as_spec(item: SpecLike) -> TrialSpec:
    if isinstance(item, TrialSpec):
        return item
    m, t, alpha = item
    return TrialSpec(m=int(m), t=t, alpha=float(alpha))


@dataclass(frozen=True)
class FreqBoundInput:
    """Inputs for the mixed-population bound.

    Args:
        rho_hat: estimated probability that an efficacy measure is null.
        trials: per-trial (m, t, alpha) specs.
        strata: optional per-trial stratum labels (same length).
    """

    rho_hat: float
    trials: Tuple[TrialSpec, ...]
    strata: Optional[Tuple[str, ...]] = None

    def __post_init__(self) -> None:
        if not 0.0 <= self.rho_hat <= 1.0:
            raise ValueError("rho_hat must lie in [0, 1]")
        trials = tuple(_as_spec(t) for t in self.trials)
        object.__setattr__(self, "trials", trials)
        if self.strata is not None:
            strata = tuple(str(s) for s in self.strata)
            if len(strata) != len(trials):
                raise ValueError("strata must parallel trials")
            object.__setattr__(self, "strata", strata)


def delta(rho: float, m: int, t: FailureRegionType) -> float:
    """Per-trial null-probability bound delta(rho, m, t).

    Type A (intersection null) is bounded by rho itself; type B (union
    null) by the union bound m * rho, which may exceed 1 -- it is a
    bound, not a probability.
    """
    if not 0.0 <= rho <= 1.0:
        raise ValueError("rho must lie in [0, 1]")
    if m < 1:
        raise ValueError("m must be >= 1")
    t = t if isinstance(t, FailureRegionType) else FailureRegionType(t)
    return rho if t is FailureRegionType.A else m * rho


def tau_hat_single(rho_hat: float, alphas: Sequence[float]) -> float:
    """All-m=1 bound: tau = rho_hat * sum(alphas).

    An empty alpha list is vacuous and yields 0.
    """
    if not 0.0 <= rho_hat <= 1.0:
        raise ValueError("rho_hat must lie in [0, 1]")
    return rho_hat * math.fsum(float(a) for a in alphas)


def tau_hat_mixed(bound_input: FreqBoundInput) -> float:
    """Mixed-population bound: (1/N) (sum delta_i) (sum alpha_i).

    The product-of-sums form is computed exactly as written; it reduces
    to ``tau_hat_single`` when every trial is (1, B).  An empty trial
    list is vacuous and yields 0.
    """
    n = len(bound_input.trials)
    if n == 0:
        return 0.0
    sum_delta = math.fsum(
        delta(bound_input.rho_hat, spec.m, spec.t)
        for spec in bound_input.trials
    )
    sum_alpha = math.fsum(spec.alpha for spec in bound_input.trials)
    return (1.0 / n) * sum_delta * sum_alpha


def capacity(
    tau0: float,
    rho_hat: float,
    alpha_fixed: float,
    mode: str = "exact",
) -> int:
    """Largest N with rho_hat * N * alpha_fixed <= tau0.

    ``mode="exact"`` computes floor(tau0 / (rho_hat * alpha_fixed)) with
    a 1e-12 relative slack so quotients that are integers up to float
    rounding are not truncated one short.

    ``mode="rounded"`` follows the two-step arithmetic sometimes used in
    practice: first floor the total spendable error tau0 / rho_hat to an
    integer, then divide by alpha_fixed.  With tau0=1, rho=0.09,
    alpha=0.025 this gives floor(11.11)/0.025 = 440 rather than the
    exact 444.

    Args:
        tau0: total error budget (> 0).
        rho_hat: null probability estimate in (0, 1].
        alpha_fixed: the common per-trial alpha.
        mode: "exact" or "rounded".

    Returns:
        Integer trial capacity.
    """
    if tau0 <= 0.0:
        raise ValueError("tau0 must be > 0")
    if not 0.0 < rho_hat <= 1.0:
        raise ValueError("rho_hat must lie in (0, 1]")
    if not 0.0 < alpha_fixed < 1.0:
        raise ValueError("alpha_fixed must lie in (0, 1)")
    if mode == "exact":
        ratio = tau0 / (rho_hat * alpha_fixed)
        return int(math.floor(ratio * (1.0 + _FLOOR_SLACK)))
    if mode == "rounded":
        total_error = math.floor(
            (tau0 / rho_hat) * (1.0 + _FLOOR_SLACK)
        )
        return int(
            math.floor((total_error / alpha_fixed) * (1.0 + _FLOOR_SLACK))
        )
    raise ValueError(f"unknown capacity mode: {mode!r}")


def tau_hat_stratified(
    trials_by_stratum: Mapping[str, Sequence[SpecLike]],
    rho_by_stratum: Mapping[str, float],
) -> Tuple[dict, float]:
    """Per-stratum mixed bounds and their total.

    Each stratum is bounded independently with its own rho estimate;
    the total is the plain sum (strata partition the population).

    Args:
        trials_by_stratum: trial specs keyed by stratum label.
        rho_by_stratum: rho estimate per stratum label.

    Returns:
        (per_stratum, total): dict of per-stratum tau values and their
        sum.

    Raises:
        ValueError: if a stratum has no rho estimate.
    """
    per_stratum = {}
    for label, trials in trials_by_stratum.items():
        if label not in rho_by_stratum:
            raise ValueError(f"missing rho estimate for stratum {label!r}")
        per_stratum[label] = tau_hat_mixed(
            FreqBoundInput(
                rho_hat=rho_by_stratum[label],
                trials=tuple(_as_spec(t) for t in trials),
            )
        )
    return per_stratum, math.fsum(per_stratum.values())
