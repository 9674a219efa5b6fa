"""Ground-truth Monte Carlo simulator for ENFP bound validation.

Generates synthetic trial populations with known per-endpoint effects,
applies a selection policy (fixed, signal-concordant, or deliberately
adversarial), counts realized false positives against the hidden truth,
and validates the frequentist and Bayesian portfolio bounds plus the
four concordance assumptions they rest on.

Determinism contract: every replicate draws from
``numpy.random.default_rng([seed, replicate])``, and the draw order
within a replicate is fixed — (m, t) assignment, effect sizes, shared
noise factor, idiosyncratic noise, then policy draws.  Identical config
and seed therefore reproduce identical populations and reports, and
replicates may run in parallel without changing results.

The endpoint-correlation model is a shared-factor Gaussian: noise =
sqrt(rc) * common + sqrt(1 - rc) * idiosyncratic, giving correlation rc
between any two endpoints of the same trial.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from enfp.hcurve import ZERO_TOLERANCE, h_values
from enfp.special import norm_ppf
from enfp.trials import (
    EfficacyMeasure,
    FailureRegionType,
    RejectionPolicy,
    TrialRecord,
)

__all__ = [
    "SCENARIO_FORMAT",
    "ConcordanceReport",
    "PolicySpec",
    "PopulationDraw",
    "ScenarioConfig",
    "SimulationReport",
    "check_concordance",
    "draw_population",
    "oracle_count_fp",
    "rho_from_prior",
    "simulate_population",
    "validate_bounds",
]

SCENARIO_FORMAT = "enfp-scenario/1"

_POLICY_KINDS = ("fixed_alpha", "signal_concordant", "adversarial")

# Absolute slack added to every 3-SE comparison so exact-equality cases
# (constant-alpha policies) cannot fail on a 1-ulp mean difference.
_EQ_SLACK = 1e-12


@dataclass(frozen=True)
class PolicySpec:
    """How a sponsor picks the nominal alpha for each proposed trial.

    ``fixed_alpha`` ignores the effect sizes entirely: a single-entry
    menu is applied verbatim, a longer menu is sampled uniformly.  The
    signal policies observe s = mean(theta) + signal_noise * N(0, 1) and
    map it onto the sorted menu through its own empirical quantiles:
    ``signal_concordant`` relaxes alpha as the signal grows (the natural
    strategy), ``adversarial`` reverses the mapping for negative testing.
    """

    kind: str
    alpha_menu: tuple = (0.025,)
    signal_noise: float = 1.0

    def __post_init__(self):
        if self.kind not in _POLICY_KINDS:
            raise ValueError(
                f"policy kind must be one of {_POLICY_KINDS}, got {self.kind!r}"
            )
        menu = tuple(float(a) for a in self.alpha_menu)
        if not menu:
            raise ValueError("alpha_menu is empty")
        if any(not 0.0 < a < 1.0 for a in menu):
            raise ValueError("alpha_menu entries must lie in (0, 1)")
        object.__setattr__(self, "alpha_menu", menu)
        noise = float(self.signal_noise)
        if not noise >= 0.0:
            raise ValueError("signal_noise must be >= 0")
        object.__setattr__(self, "signal_noise", noise)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "alpha_menu": list(self.alpha_menu),
            "signal_noise": self.signal_noise,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "PolicySpec":
        return cls(
            kind=data["kind"],
            alpha_menu=tuple(data["alpha_menu"]),
            signal_noise=data.get("signal_noise", 1.0),
        )


@dataclass(frozen=True)
class ScenarioConfig:
    """Full specification of a simulated trial population.

    ``true_prior`` is an explicit grid distribution (theta values with
    probabilities); per-endpoint effects are drawn i.i.d. from it, so
    endpoint indices carry no information.  ``m_distribution`` assigns
    probabilities to (m, failure-type) designs; (1, A) designs are
    normalized to (1, B) since the two coincide for a single endpoint.
    """

    true_prior: tuple  # ((theta, ...), (mass, ...))
    n_trials: int
    m_distribution: tuple  # ((m, FailureRegionType, prob), ...)
    policy: PolicySpec
    seed: int
    endpoint_correlation: float = 0.0
    replicates: int = 1

    def __post_init__(self):
        theta, mass = self.true_prior
        theta = tuple(float(t) for t in theta)
        mass = tuple(float(p) for p in mass)
        if len(theta) != len(mass) or not theta:
            raise ValueError("true_prior needs parallel theta/mass sequences")
        if any(not math.isfinite(t) for t in theta):
            raise ValueError("prior support must be finite")
        if any(p < 0 for p in mass):
            raise ValueError("prior masses must be nonnegative")
        total = math.fsum(mass)
        if not total > 0:
            raise ValueError("prior masses sum to zero")
        merged_prior: dict = {}
        for t, p in zip(theta, mass):
            merged_prior[t] = merged_prior.get(t, 0.0) + p / total
        theta = tuple(sorted(merged_prior))
        mass = tuple(merged_prior[t] for t in theta)
        object.__setattr__(self, "true_prior", (theta, mass))

        if not (isinstance(self.n_trials, int) and self.n_trials >= 1):
            raise ValueError("n_trials must be an integer >= 1")
        if not (isinstance(self.seed, int) and not isinstance(self.seed, bool)):
            raise ValueError("seed is mandatory and must be an integer")
        if not (isinstance(self.replicates, int) and self.replicates >= 1):
            raise ValueError("replicates must be an integer >= 1")
        rc = float(self.endpoint_correlation)
        if not 0.0 <= rc < 1.0:
            raise ValueError("endpoint_correlation must lie in [0, 1)")
        object.__setattr__(self, "endpoint_correlation", rc)

        merged: dict = {}
        for m, t, prob in self.m_distribution:
            m = int(m)
            t = FailureRegionType(t)
            prob = float(prob)
            if m < 1:
                raise ValueError("endpoint count m must be >= 1")
            if prob < 0:
                raise ValueError("m_distribution probabilities must be >= 0")
            if m == 1:
                t = FailureRegionType.B
            merged[(m, t)] = merged.get((m, t), 0.0) + prob
        total = math.fsum(merged.values())
        if not total > 0:
            raise ValueError("m_distribution probabilities sum to zero")
        dist = tuple(
            (m, t, p / total)
            for (m, t), p in sorted(
                merged.items(), key=lambda kv: (kv[0][0], kv[0][1].value)
            )
        )
        object.__setattr__(self, "m_distribution", dist)
        if not isinstance(self.policy, PolicySpec):
            raise ValueError("policy must be a PolicySpec")

    def prior_model(self):
        """The true prior as a PriorModel (for oracle-mode h values).

        PriorModel grids are uniform, so the support points are embedded
        into the coarsest uniform grid containing them (zero mass
        elsewhere).  Support that fits no uniform grid is an error; pass
        an explicit model to validate_bounds in that case.
        """
        from enfp.deconv import PriorModel

        theta = np.asarray(self.true_prior[0])
        mass = np.asarray(self.true_prior[1])
        if theta.size == 1:
            return PriorModel.from_masses(theta, mass)
        step = _common_step(np.diff(theta))
        offsets = (theta - theta[0]) / step
        if step <= 0 or np.max(np.abs(offsets - np.round(offsets))) > 1e-6:
            raise ValueError(
                "prior support does not embed in a uniform grid; supply "
                "model_for_bound explicitly"
            )
        n_steps = int(round((theta[-1] - theta[0]) / step))
        grid = theta[0] + step * np.arange(n_steps + 1)
        masses = np.zeros(grid.size)
        masses[np.round(offsets).astype(int)] = mass
        return PriorModel.from_masses(grid, masses)

    def to_dict(self) -> dict:
        return {
            "format": SCENARIO_FORMAT,
            "true_prior": {
                "theta": list(self.true_prior[0]),
                "mass": list(self.true_prior[1]),
            },
            "n_trials": self.n_trials,
            "m_distribution": [
                [m, t.value, p] for m, t, p in self.m_distribution
            ],
            "endpoint_correlation": self.endpoint_correlation,
            "policy": self.policy.to_dict(),
            "seed": self.seed,
            "replicates": self.replicates,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ScenarioConfig":
        tag = data.get("format", SCENARIO_FORMAT)
        if tag != SCENARIO_FORMAT:
            raise ValueError(f"unrecognized scenario format {tag!r}")
        prior = data["true_prior"]
        return cls(
            true_prior=(tuple(prior["theta"]), tuple(prior["mass"])),
            n_trials=int(data["n_trials"]),
            m_distribution=tuple(
                (int(m), t, float(p)) for m, t, p in data["m_distribution"]
            ),
            endpoint_correlation=float(data.get("endpoint_correlation", 0.0)),
            policy=PolicySpec.from_dict(data["policy"]),
            seed=int(data["seed"]),
            replicates=int(data.get("replicates", 1)),
        )

    def to_json(self, indent: int = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "ScenarioConfig":
        return cls.from_dict(json.loads(text))


def _common_step(gaps) -> float:
    """Float GCD of positive gaps.

    Euclidean algorithm with remainder folding: gcd(b, r) = gcd(b, b-r),
    so replacing r by min(r, b-r) preserves the result while absorbing
    representation error that lands a near-multiple's remainder at ~b
    instead of ~0.
    """
    tol = 1e-9 * float(np.max(gaps))
    step = 0.0
    for gap in gaps:
        a, b = float(gap), step
        while b > tol:
            r = math.fmod(a, b)
            a, b = b, min(r, b - r)
        step = a
    return step


def rho_from_prior(cfg: ScenarioConfig) -> float:
    """Oracle null fraction: prior mass at theta <= 0."""
    theta, mass = cfg.true_prior
    return math.fsum(p for t, p in zip(theta, mass) if t <= ZERO_TOLERANCE)


@dataclass(frozen=True)
class PopulationDraw:
    """One replicate of a simulated population, as padded arrays.

    Arrays are (n,) per trial or (n, m_max) per endpoint slot; slots past
    a trial's m are NaN (floats) / False (masks).  ``positive`` applies
    the per-trial policy exactly as the trial-model classifier does:
    type A rejects when any endpoint exceeds Phi^-1(1 - alpha/m), type B
    when every endpoint exceeds Phi^-1(1 - alpha).
    """

    replicate: int
    m: np.ndarray
    is_type_a: np.ndarray
    theta: np.ndarray
    z: np.ndarray
    valid: np.ndarray
    alpha: np.ndarray
    critical_z: np.ndarray
    positive: np.ndarray
    null_truth: np.ndarray
    signal: np.ndarray | None = None

    @property
    def n_trials(self) -> int:
        return int(self.m.size)

    @property
    def m_max(self) -> int:
        return int(self.theta.shape[1])

    def to_records(self) -> list:
        """Materialize (TrialRecord, true theta tuple) pairs.

        Intended for modest n (interop and audit); the array form is the
        workhorse for large populations.
        """
        out = []
        for i in range(self.n_trials):
            m = int(self.m[i])
            t = (
                FailureRegionType.A
                if bool(self.is_type_a[i])
                else FailureRegionType.B
            )
            policy = RejectionPolicy.at_alpha(
                float(self.alpha[i]), m=m, failure_type=t
            )
            measures = tuple(
                EfficacyMeasure(endpoint_index=j + 1, z=float(self.z[i, j]))
                for j in range(m)
            )
            record = TrialRecord(
                trial_id=f"sim-{self.replicate}-{i}",
                m=m,
                failure_type=t,
                measures=measures,
                policy=policy,
                outcome="positive" if bool(self.positive[i]) else "negative",
            )
            out.append((record, tuple(float(x) for x in self.theta[i, :m])))
        return out


def draw_population(cfg: ScenarioConfig, replicate: int = 0) -> PopulationDraw:
    """Draw one population replicate (vectorized, fixed draw order)."""
    if not 0 <= replicate:
        raise ValueError("replicate index must be >= 0")
    rng = np.random.default_rng([cfg.seed, replicate])
    n = cfg.n_trials

    ms = np.array([m for m, _, _ in cfg.m_distribution], dtype=np.int64)
    a_flags = np.array(
        [t is FailureRegionType.A for _, t, _ in cfg.m_distribution]
    )
    probs = np.array([p for _, _, p in cfg.m_distribution])
    which = rng.choice(ms.size, size=n, p=probs)
    m = ms[which]
    is_type_a = a_flags[which]
    m_max = int(ms.max())

    theta_support = np.asarray(cfg.true_prior[0])
    theta_mass = np.asarray(cfg.true_prior[1])
    theta_idx = rng.choice(theta_support.size, size=(n, m_max), p=theta_mass)
    theta = theta_support[theta_idx]

    common = rng.standard_normal((n, 1))
    idio = rng.standard_normal((n, m_max))
    rc = cfg.endpoint_correlation
    z = theta + math.sqrt(rc) * common + math.sqrt(1.0 - rc) * idio

    valid = np.arange(m_max)[None, :] < m[:, None]
    theta = np.where(valid, theta, np.nan)
    z = np.where(valid, z, np.nan)

    alpha, signal = _policy_alphas(rng, cfg.policy, theta, n)

    critical = np.where(
        is_type_a, norm_ppf(1.0 - alpha / m), norm_ppf(1.0 - alpha)
    )
    exceed = np.where(valid, z > critical[:, None], False)
    n_exceed = exceed.sum(axis=1)
    positive = np.where(is_type_a, n_exceed > 0, n_exceed == m)

    beneficial = np.where(valid, theta > 0.0, False)
    n_beneficial = beneficial.sum(axis=1)
    # Failure region truth: A fails when all theta <= 0, B when any is.
    null_truth = np.where(is_type_a, n_beneficial == 0, n_beneficial < m)

    return PopulationDraw(
        replicate=int(replicate),
        m=m,
        is_type_a=is_type_a,
        theta=theta,
        z=z,
        valid=valid,
        alpha=alpha,
        critical_z=critical,
        positive=positive,
        null_truth=null_truth,
        signal=signal,
    )


def _policy_alphas(rng, policy: PolicySpec, theta, n):
    menu = np.sort(np.asarray(policy.alpha_menu))
    k = menu.size
    if policy.kind == "fixed_alpha":
        if k == 1:
            return np.full(n, menu[0]), None
        return menu[rng.integers(0, k, size=n)], None
    signal = np.nanmean(theta, axis=1) + policy.signal_noise * (
        rng.standard_normal(n)
    )
    if k == 1:
        return np.full(n, menu[0]), signal
    edges = np.quantile(signal, np.arange(1, k) / k)
    bins = np.searchsorted(edges, signal, side="right")
    if policy.kind == "signal_concordant":
        return menu[bins], signal
    return menu[k - 1 - bins], signal  # adversarial: stringent when strong


def simulate_population(cfg: ScenarioConfig, replicate: int = 0) -> list:
    """Record-level population: list of (TrialRecord, theta tuple)."""
    return draw_population(cfg, replicate).to_records()


def oracle_count_fp(population) -> int:
    """Count positives whose hidden truth lies in the failure region."""
    if isinstance(population, PopulationDraw):
        return int(np.count_nonzero(population.positive & population.null_truth))
    count = 0
    for record, theta in population:
        if record.outcome != "positive":
            continue
        theta = np.asarray(theta, dtype=float)
        if record.failure_type is FailureRegionType.A:
            in_failure = bool(np.all(theta <= 0.0))
        else:
            in_failure = bool(np.any(theta <= 0.0))
        count += int(in_failure)
    return count


# ----------------------------------------------------------------------
# Concordance diagnostics
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class MeanCheck:
    """A <= comparison of conditional alpha means at 3 MC-SE."""

    name: str
    mean_null: float
    mean_nonnull: float
    se_diff: float
    n_null: int
    n_nonnull: int
    passed: bool
    vacuous: bool = False

    def to_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass(frozen=True)
class BinnedCheck:
    """Per-z-bin comparison of null fractions at 3 MC-SE.

    The underlying assumption conditions on exact z; binning (width
    0.25) makes the empirical check an approximation of that statement.
    Bins holding only one outcome class are skipped and counted.  Each
    checked bin runs a pooled two-proportion z-test at 3 SE; since that
    threshold itself false-flags ~0.135% of null bins, the overall
    verdict tolerates up to ``failure_allowance`` flagged bins — the
    0.999 binomial quantile of pure noise across ``n_bins_checked``
    tests — and fails beyond it.
    """

    name: str
    bin_width: float
    n_bins_checked: int
    n_bins_skipped: int
    n_bins_failed: int
    failure_allowance: int
    worst_excess: float | None
    n_units: int
    passed: bool

    def to_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass(frozen=True)
class ConcordanceReport:
    first: MeanCheck
    second: MeanCheck
    third: BinnedCheck
    fourth: BinnedCheck

    @property
    def passed(self) -> bool:
        return (
            self.first.passed
            and self.second.passed
            and self.third.passed
            and self.fourth.passed
        )

    def to_dict(self) -> dict:
        return {
            "first": self.first.to_dict(),
            "second": self.second.to_dict(),
            "third": self.third.to_dict(),
            "fourth": self.fourth.to_dict(),
            "passed": self.passed,
        }


@dataclass
class _Pool:
    """Compact per-replicate extracts pooled for concordance checks."""

    trial_alpha: list = field(default_factory=list)
    trial_null: list = field(default_factory=list)
    trial_positive: list = field(default_factory=list)
    trial_m1: list = field(default_factory=list)
    trial_z1: list = field(default_factory=list)
    slot_alpha: list = field(default_factory=list)
    slot_null: list = field(default_factory=list)
    slot_positive: list = field(default_factory=list)
    slot_z: list = field(default_factory=list)
    slot_multi: list = field(default_factory=list)

    def add(self, draw: PopulationDraw) -> None:
        self.trial_alpha.append(draw.alpha)
        self.trial_null.append(draw.null_truth)
        self.trial_positive.append(draw.positive)
        m1 = draw.m == 1
        self.trial_m1.append(m1)
        self.trial_z1.append(draw.z[:, 0])
        rows, cols = np.nonzero(draw.valid)
        self.slot_alpha.append(draw.alpha[rows])
        self.slot_null.append(draw.theta[rows, cols] <= 0.0)
        self.slot_positive.append(draw.positive[rows])
        self.slot_z.append(draw.z[rows, cols])
        self.slot_multi.append(draw.m[rows] > 1)

    def concat(self) -> dict:
        return {
            key: np.concatenate(value)
            for key, value in self.__dict__.items()
        }


def _mean_check(name, alpha, null_mask) -> MeanCheck:
    n_null = int(np.count_nonzero(null_mask))
    n_nonnull = int(null_mask.size - n_null)
    if n_null == 0 or n_nonnull == 0:
        return MeanCheck(
            name=name,
            mean_null=float("nan"),
            mean_nonnull=float("nan"),
            se_diff=float("nan"),
            n_null=n_null,
            n_nonnull=n_nonnull,
            passed=True,
            vacuous=True,
        )
    a_null = alpha[null_mask]
    a_nonnull = alpha[~null_mask]
    mean_null = float(a_null.mean())
    mean_nonnull = float(a_nonnull.mean())
    var_null = float(a_null.var(ddof=1)) if n_null > 1 else 0.0
    var_nonnull = float(a_nonnull.var(ddof=1)) if n_nonnull > 1 else 0.0
    se = math.sqrt(var_null / n_null + var_nonnull / n_nonnull)
    passed = mean_null - mean_nonnull <= 3.0 * se + _EQ_SLACK
    return MeanCheck(
        name=name,
        mean_null=mean_null,
        mean_nonnull=mean_nonnull,
        se_diff=se,
        n_null=n_null,
        n_nonnull=n_nonnull,
        passed=passed,
    )


# Per-bin false-flag rate of a one-sided 3-SE test, 1 - Phi(3).
_P_FLAG = 1.3498980316300946e-03


def _noise_allowance(n_bins: int, p: float = _P_FLAG) -> int:
    """Largest flag count consistent with pure noise at the 0.999 level.

    Returns the greatest a such that Pr[Binomial(n_bins, p) > a] >= 1e-3
    is false — i.e. observing more than a flags has probability < 1e-3
    under the null that every bin satisfies the assumption.
    """
    if n_bins == 0:
        return 0
    q = 1.0 - p
    pmf = q**n_bins
    cdf = pmf
    k = 0
    while 1.0 - cdf >= 1e-3 and k < n_bins:
        k += 1
        pmf *= (n_bins - k + 1) / k * (p / q)
        cdf += pmf
    return k


def _binned_check(name, z, null, positive, bin_width) -> BinnedCheck:
    n_units = int(z.size)
    if n_units == 0:
        return BinnedCheck(
            name=name,
            bin_width=bin_width,
            n_bins_checked=0,
            n_bins_skipped=0,
            n_bins_failed=0,
            failure_allowance=0,
            worst_excess=None,
            n_units=0,
            passed=True,
        )
    bins = np.floor(z / bin_width).astype(np.int64)
    checked = skipped = failed = 0
    worst = None
    for b in np.unique(bins):
        in_bin = bins == b
        pos = positive & in_bin
        neg = ~positive & in_bin
        n_pos = int(np.count_nonzero(pos))
        n_neg = int(np.count_nonzero(neg))
        if n_pos == 0 or n_neg == 0:
            skipped += 1
            continue
        checked += 1
        x_pos = int(np.count_nonzero(null & pos))
        x_neg = int(np.count_nonzero(null & neg))
        p_pos = x_pos / n_pos
        p_neg = x_neg / n_neg
        # Pooled SE (two-proportion score test): stays honest when a
        # sample proportion sits on the 0/1 boundary, where the unpooled
        # estimator degenerates to zero variance.
        pooled = (x_pos + x_neg) / (n_pos + n_neg)
        se = math.sqrt(
            pooled * (1.0 - pooled) * (1.0 / n_pos + 1.0 / n_neg)
        )
        excess = (p_pos - p_neg) - 3.0 * se
        if worst is None or excess > worst:
            worst = excess
        if excess > _EQ_SLACK:
            failed += 1
    allowance = _noise_allowance(checked)
    return BinnedCheck(
        name=name,
        bin_width=bin_width,
        n_bins_checked=checked,
        n_bins_skipped=skipped,
        n_bins_failed=failed,
        failure_allowance=allowance,
        worst_excess=worst,
        n_units=n_units,
        passed=failed <= allowance,
    )


def _concordance_from_pool(pool: dict, bin_width: float) -> ConcordanceReport:
    first = _mean_check(
        "first: E[alpha | endpoint null] <= E[alpha | endpoint non-null]",
        pool["slot_alpha"],
        pool["slot_null"],
    )
    second = _mean_check(
        "second: E[alpha | failure region] <= E[alpha | complement]",
        pool["trial_alpha"],
        pool["trial_null"],
    )
    m1 = pool["trial_m1"]
    third = _binned_check(
        "third: Pr[null | z bin, positive] <= Pr[null | z bin, negative] "
        "(single-endpoint trials)",
        pool["trial_z1"][m1],
        pool["trial_null"][m1],
        pool["trial_positive"][m1],
        bin_width,
    )
    multi = pool["slot_multi"]
    fourth = _binned_check(
        "fourth: per-endpoint Pr[null | z bin, positive] <= negative "
        "(multi-endpoint trials)",
        pool["slot_z"][multi],
        pool["slot_null"][multi],
        pool["slot_positive"][multi],
        bin_width,
    )
    return ConcordanceReport(first=first, second=second, third=third, fourth=fourth)


def check_concordance(draws, bin_width: float = 0.25) -> ConcordanceReport:
    """Empirical checks of the four concordance assumptions at 3 MC-SE.

    Accepts one PopulationDraw or an iterable of them (pooled).  The
    third/fourth checks bin z (width 0.25 by default) because the
    assumptions condition on exact z; one-class bins are skipped and
    reported, not judged.
    """
    if isinstance(draws, PopulationDraw):
        draws = [draws]
    pool = _Pool()
    for draw in draws:
        pool.add(draw)
    if not pool.trial_alpha:
        raise ValueError("no draws given")
    return _concordance_from_pool(pool.concat(), bin_width)


# ----------------------------------------------------------------------
# Bound validation
# ----------------------------------------------------------------------


def _tau_hat_arrays(rho: float, draw: PopulationDraw) -> float:
    """Portfolio frequentist bound over every proposed trial (Eq. form:
    product of sums over delta and alpha).  Vectorized mirror of
    freq_bounds.tau_hat_mixed, tested to agree with it."""
    deltas = np.where(draw.is_type_a, rho, rho * draw.m)
    n = draw.n_trials
    return float(deltas.sum() * draw.alpha.sum() / n)


def _omega_hat_arrays(
    model, draw: PopulationDraw, endpoint_mode: str = "designated",
    block: int = 20000,
) -> float:
    """Bayesian bound over positive trials, vectorized mirror of
    bayes_bounds.omega_hat (designated = endpoint 1, tightest = max z)."""
    if endpoint_mode not in ("designated", "tightest"):
        raise ValueError(f"unknown endpoint mode {endpoint_mode!r}")
    pos = np.nonzero(draw.positive)[0]
    if pos.size == 0:
        return 0.0
    z = draw.z[pos]
    valid = draw.valid[pos]
    rows, cols = np.nonzero(valid)
    flat_z = z[rows, cols]
    flat_h = np.empty_like(flat_z)
    for start in range(0, flat_z.size, block):
        stop = min(start + block, flat_z.size)
        flat_h[start:stop] = h_values(model, flat_z[start:stop])
    h = np.full(z.shape, np.nan)
    h[rows, cols] = flat_h
    loss = np.where(valid, 1.0 - h, 0.0)
    is_a = draw.is_type_a[pos]
    if endpoint_mode == "designated":
        single = loss[:, 0]
    else:
        z_filled = np.where(valid, z, -np.inf)
        single = loss[np.arange(z.shape[0]), np.argmax(z_filled, axis=1)]
    contributions = np.where(is_a, single, loss.sum(axis=1))
    return float(contributions.sum())


@dataclass(frozen=True)
class SimulationReport:
    """Monte Carlo comparison of realized false positives to the bounds."""

    n_trials: int
    replicates: int
    rho: float
    model_id: str
    realized_fp_mean: float
    realized_fp_se: float
    positive_count_mean: float
    tau_hat_mean: float
    tau_hat_se: float
    omega_hat_mean: float
    omega_hat_se: float
    alpha_mean_null: float
    alpha_mean_nonnull: float
    concordance: ConcordanceReport
    tau_margin: float
    omega_margin: float
    bound_violations: dict

    def to_dict(self) -> dict:
        out = dict(self.__dict__)
        out["concordance"] = self.concordance.to_dict()
        out["bound_violations"] = dict(self.bound_violations)
        if self.replicates < 2:
            # A single replicate carries no spread information; report
            # the standard errors as absent rather than a fake zero.
            for key in ("realized_fp_se", "tau_hat_se", "omega_hat_se"):
                out[key] = None
        return out

    def _with_se(self, mean: float, se: float) -> str:
        if self.replicates < 2:
            return f"{mean:.6g} (SE n/a)"
        return f"{mean:.6g} +/- {se:.3g}"

    def table(self) -> str:
        rows = [
            ("trials per replicate", f"{self.n_trials}"),
            ("replicates", f"{self.replicates}"),
            ("oracle null fraction rho", f"{self.rho:.6g}"),
            (
                "realized false positives",
                self._with_se(self.realized_fp_mean, self.realized_fp_se),
            ),
            ("positive count (M)", f"{self.positive_count_mean:.6g}"),
            (
                "tau-hat (frequentist bound)",
                self._with_se(self.tau_hat_mean, self.tau_hat_se),
            ),
            (
                "omega-hat (Bayesian bound)",
                self._with_se(self.omega_hat_mean, self.omega_hat_se),
            ),
            ("E[alpha | null]", f"{self.alpha_mean_null:.6g}"),
            ("E[alpha | non-null]", f"{self.alpha_mean_nonnull:.6g}"),
            ("concordance", "pass" if self.concordance.passed else "FAIL"),
            (
                "tau bound violated",
                "YES" if self.bound_violations["tau"] else "no",
            ),
            (
                "omega bound violated",
                "YES" if self.bound_violations["omega"] else "no",
            ),
        ]
        width = max(len(name) for name, _ in rows)
        return "\n".join(f"{name:<{width}}  {val}" for name, val in rows)


def _mc_se(values: np.ndarray) -> float:
    if values.size < 2:
        return 0.0
    return float(values.std(ddof=1) / math.sqrt(values.size))


def validate_bounds(
    cfg: ScenarioConfig,
    rho_for_bound: float | None = None,
    model_for_bound=None,
    endpoint_mode: str = "designated",
) -> SimulationReport:
    """Run every replicate and compare realized FPs against both bounds.

    With the defaults the comparison runs in oracle mode — the bound
    inputs are the scenario's own truth (rho from the prior's negative
    mass, h from the true prior).  Passing a fitted model/rho instead
    gives the end-to-end check.  A bound is flagged violated when the
    mean of (realized - bound) across replicates exceeds 3 MC-SE of
    that difference.
    """
    rho = rho_from_prior(cfg) if rho_for_bound is None else float(rho_for_bound)
    model = cfg.prior_model() if model_for_bound is None else model_for_bound
    fps = np.empty(cfg.replicates)
    taus = np.empty(cfg.replicates)
    omegas = np.empty(cfg.replicates)
    positives = np.empty(cfg.replicates)
    pool = _Pool()
    for rep in range(cfg.replicates):
        draw = draw_population(cfg, rep)
        fps[rep] = oracle_count_fp(draw)
        taus[rep] = _tau_hat_arrays(rho, draw)
        omegas[rep] = _omega_hat_arrays(model, draw, endpoint_mode)
        positives[rep] = np.count_nonzero(draw.positive)
        pool.add(draw)
    concordance = _concordance_from_pool(pool.concat(), 0.25)

    tau_diff = fps - taus
    omega_diff = fps - omegas
    tau_margin = float(tau_diff.mean()) - 3.0 * _mc_se(tau_diff)
    omega_margin = float(omega_diff.mean()) - 3.0 * _mc_se(omega_diff)
    return SimulationReport(
        n_trials=cfg.n_trials,
        replicates=cfg.replicates,
        rho=rho,
        model_id=model.model_id,
        realized_fp_mean=float(fps.mean()),
        realized_fp_se=_mc_se(fps),
        positive_count_mean=float(positives.mean()),
        tau_hat_mean=float(taus.mean()),
        tau_hat_se=_mc_se(taus),
        omega_hat_mean=float(omegas.mean()),
        omega_hat_se=_mc_se(omegas),
        alpha_mean_null=concordance.second.mean_null,
        alpha_mean_nonnull=concordance.second.mean_nonnull,
        concordance=concordance,
        tau_margin=tau_margin,
        omega_margin=omega_margin,
        bound_violations={
            "tau": tau_margin > _EQ_SLACK,
            "omega": omega_margin > _EQ_SLACK,
        },
    )
