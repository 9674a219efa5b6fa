"""Persistent append-only error-spending ledger for ENFP budgets.

A frequentist ledger charges spend at proposal (design) time: each
proposal recomputes the portfolio bound as a product of sums and is
refused outright if it would push the bound past the budget.  A Bayesian
ledger charges at outcome time and refuses nothing — outcomes are
observations, not permissions — but raises a persistent over-budget flag
once the budget is exceeded.

Every accepted mutation appends exactly one JSON object per line to the
backing file and fsyncs before returning.  The first line is a header
pinning the format version, mode, budgets, and the estimated null rate
(frequentist) or prior-model hash (Bayesian).  Reopening a ledger replays
the log through the same accumulation code used by live operations, so
the reconstructed running sums are byte-identical to the originals; any
entry whose stored spend fails to replay exactly marks the file corrupt.

Single-writer model: mutations must be serialized through one
:class:`Ledger` instance.  ``status`` is a pure read.  Multi-process
locking is out of scope.
"""

from __future__ import annotations

import json
import math
import os
import time
from dataclasses import dataclass, field

from enfp.bayes_bounds import PositiveTrialResult, positive_result, trial_contribution
from enfp.freq_bounds import delta
from enfp.trials import CannotClassifyError, FailureRegionType, TrialRecord

__all__ = [
    "LEDGER_FORMAT",
    "Ledger",
    "LedgerCorruptError",
    "LedgerError",
    "OutcomeRecord",
    "ProposeDecision",
    "StratumSpec",
]

LEDGER_FORMAT = "enfp-ledger/1"


class LedgerError(ValueError):
    """Invalid ledger operation or configuration."""


class LedgerCorruptError(LedgerError):
    """The backing file failed validation during replay."""


@dataclass(frozen=True)
class StratumSpec:
    """Configuration for one independently budgeted stratum."""

    budget: float
    rho_hat: float | None = None

    def __post_init__(self):
        if not self.budget > 0:
            raise LedgerError("budget must be positive")
        if self.rho_hat is not None and not 0.0 <= self.rho_hat <= 1.0:
            raise LedgerError("rho_hat must lie in [0, 1]")


@dataclass(frozen=True)
class ProposeDecision:
    """Result of a frequentist proposal."""

    accepted: bool
    projected: float
    spent: float
    budget: float
    sequence: int | None = None

    @property
    def remaining(self) -> float:
        return self.budget - self.spent


@dataclass(frozen=True)
class OutcomeRecord:
    """Result of recording an outcome or adjustment."""

    sequence: int
    kind: str
    trial_id: str
    spend_delta: float
    spent: float
    budget: float

    @property
    def over_budget(self) -> bool:
        return self.spent > self.budget


@dataclass
class _StratumState:
    budget: float
    rho_hat: float | None
    deltas: list = field(default_factory=list)
    alphas: list = field(default_factory=list)
    contributions: list = field(default_factory=list)
    n_accepted: int = 0
    n_outcomes: int = 0
    n_positive: int = 0
    n_adjustments: int = 0

    def freq_spent(self) -> float:
        if self.n_accepted == 0:
            return 0.0
        return (
            math.fsum(self.deltas) * math.fsum(self.alphas) / self.n_accepted
        )

    def bayes_spent(self) -> float:
        return math.fsum(self.contributions)


class Ledger:
    """Append-only error-spending ledger bound to a JSON-lines file.

    Construct with :meth:`create` (new file) or :meth:`open` (replay an
    existing file); the bare constructor is internal.
    """

    def __init__(self, path, header: dict):
        self._path = os.fspath(path)
        self._header = header
        self._mode = header["mode"]
        self._endpoint_mode = header.get("endpoint_mode", "designated")
        self._model_id = header.get("model_id")
        self._strata: dict = {}
        strata = header.get("strata")
        if strata is None:
            self._stratified = False
            self._strata[None] = _StratumState(
                budget=float(header["budget"]),
                rho_hat=header.get("rho_hat"),
            )
        else:
            self._stratified = True
            for name, spec in strata.items():
                self._strata[name] = _StratumState(
                    budget=float(spec["budget"]),
                    rho_hat=spec.get("rho_hat"),
                )
        self._entries: list = []
        self._next_sequence = 1
        self._n_entries = 0
        self._n_adjustments = 0
        self._fh = None

    # ------------------------------------------------------------------
    # Construction
    # ------------------------------------------------------------------

    @classmethod
    def create(
        cls,
        path,
        mode: str,
        budget: float | None = None,
        rho_hat: float | None = None,
        model=None,
        strata: dict | None = None,
        endpoint_mode: str = "designated",
    ) -> "Ledger":
        """Create a new ledger file and write its header line.

        Exactly one of ``budget`` (with ``rho_hat`` in frequentist mode)
        or ``strata`` (a mapping of name -> StratumSpec, each with an
        independent budget) must be given.  Bayesian ledgers pin the
        prior model's hash in the header and refuse outcomes recorded
        against any other model.
        """
        if mode not in ("frequentist", "bayes"):
            raise LedgerError(f"unknown ledger mode {mode!r}")
        if endpoint_mode not in ("designated", "tightest"):
            raise LedgerError(f"unknown endpoint mode {endpoint_mode!r}")
        header = {
            "format": LEDGER_FORMAT,
            "mode": mode,
            "endpoint_mode": endpoint_mode,
            "created": time.time(),
        }
        if strata is not None:
            if budget is not None or rho_hat is not None:
                raise LedgerError(
                    "give either a top-level budget or strata, not both"
                )
            if not strata:
                raise LedgerError("strata mapping is empty")
            header_strata = {}
            for name, spec in strata.items():
                if not isinstance(spec, StratumSpec):
                    spec = StratumSpec(**spec)
                if mode == "frequentist" and spec.rho_hat is None:
                    raise LedgerError(
                        f"stratum {name!r} needs rho_hat in frequentist mode"
                    )
                one = {"budget": spec.budget}
                if spec.rho_hat is not None:
                    one["rho_hat"] = spec.rho_hat
                header_strata[str(name)] = one
            header["strata"] = header_strata
        else:
            if budget is None or not budget > 0:
                raise LedgerError("budget must be positive")
            header["budget"] = float(budget)
            if mode == "frequentist":
                if rho_hat is None:
                    raise LedgerError("frequentist mode requires rho_hat")
                if not 0.0 <= rho_hat <= 1.0:
                    raise LedgerError("rho_hat must lie in [0, 1]")
                header["rho_hat"] = float(rho_hat)
        if mode == "bayes":
            if model is None:
                raise LedgerError("bayes mode requires the prior model")
            header["model_id"] = model.model_id
        if os.path.exists(path):
            raise LedgerError(
                f"refusing to overwrite existing ledger file {path!s}"
            )
        ledger = cls(path, header)
        ledger._fh = open(path, "a", encoding="utf-8")
        ledger._write_line(header)
        return ledger

    @classmethod
    def open(cls, path) -> "Ledger":
        """Replay an existing ledger file, validating every entry."""
        try:
            with open(path, encoding="utf-8") as fh:
                lines = fh.read().splitlines()
        except OSError as exc:
            raise LedgerError(f"cannot read ledger file: {exc}") from exc
        if not lines:
            raise LedgerCorruptError("empty ledger file (missing header)")
        header = cls._parse_line(lines[0], 1)
        if header.get("format") != LEDGER_FORMAT:
            raise LedgerCorruptError(
                f"unrecognized ledger format {header.get('format')!r}"
            )
        if "budget" not in header and "strata" not in header:
            raise LedgerCorruptError("header pins no budget")
        ledger = cls(path, header)
        for lineno, raw in enumerate(lines[1:], start=2):
            ledger._apply_entry(cls._parse_line(raw, lineno), lineno=lineno)
        ledger._fh = open(path, "a", encoding="utf-8")
        return ledger

    # ------------------------------------------------------------------
    # Operations
    # ------------------------------------------------------------------

    def propose(
        self, trial_id, m: int, t, alpha: float, stratum: str | None = None
    ) -> ProposeDecision:
        """Propose a trial design (frequentist mode only).

        Recomputes the projected portfolio bound over all previously
        accepted trials plus this one; accepts iff projected <= budget.
        Rejection appends nothing and mutates nothing.
        """
        self._require_open()
        if self._mode != "frequentist":
            raise LedgerError("propose is a frequentist-mode operation")
        try:
            t = FailureRegionType(t)
        except ValueError as exc:
            raise LedgerError(str(exc)) from exc
        if not (isinstance(m, (int,)) and not isinstance(m, bool) and m >= 1):
            raise LedgerError("m must be an integer >= 1")
        alpha = float(alpha)
        if not 0.0 < alpha < 1.0:
            raise LedgerError("alpha must lie in (0, 1)")
        state = self._resolve_stratum(stratum)
        d = delta(state.rho_hat, m, t)
        projected = (
            math.fsum(state.deltas + [d])
            * math.fsum(state.alphas + [alpha])
            / (state.n_accepted + 1)
        )
        if projected > state.budget:
            return ProposeDecision(
                accepted=False,
                projected=projected,
                spent=state.freq_spent(),
                budget=state.budget,
            )
        entry = {
            "sequence": self._next_sequence,
            "kind": "proposal",
            "trial_id": str(trial_id),
            "stratum": stratum,
            "payload": {"m": int(m), "t": t.value, "alpha": alpha},
            "projected": projected,
            "timestamp": time.time(),
            "note": None,
        }
        self._apply_entry(entry)
        self._write_line(entry)
        return ProposeDecision(
            accepted=True,
            projected=projected,
            spent=projected,
            budget=state.budget,
            sequence=entry["sequence"],
        )

    def record_outcome(self, trial: TrialRecord, model=None) -> OutcomeRecord:
        """Record a classified trial outcome.

        Bayesian mode: a positive outcome freezes the trial's h values
        against the pinned model and adds its contribution to the spend;
        a negative outcome is logged with zero spend.  Over-budget
        outcomes are still recorded — the over-budget flag is raised for
        all subsequent status calls, but facts are never refused.

        Frequentist mode: outcomes are logged for audit only and carry
        no spend (frequentist spend lives at proposal time).
        """
        self._require_open()
        if trial.outcome is None:
            raise LedgerError(
                f"trial {trial.trial_id} has no recorded outcome"
            )
        state = self._resolve_stratum(trial.stratum)
        payload = {
            "outcome": trial.outcome,
            "m": trial.m,
            "t": trial.failure_type.value,
        }
        try:
            payload["z"] = [float(z) for z in trial.z_values()]
        except CannotClassifyError:
            payload["z"] = None
        spend_delta = 0.0
        spent_after = (
            state.freq_spent()
            if self._mode == "frequentist"
            else state.bayes_spent()
        )
        if self._mode == "bayes" and trial.outcome == "positive":
            result = self._freeze(trial, model)
            payload["z"] = list(result.z_values)
            payload["h"] = list(result.h_values)
            spend_delta = trial_contribution(result, self._endpoint_mode)
            spent_after = math.fsum(state.contributions + [spend_delta])
        entry = {
            "sequence": self._next_sequence,
            "kind": "outcome",
            "trial_id": str(trial.trial_id),
            "stratum": trial.stratum,
            "payload": payload,
            "spend_delta": spend_delta,
            "spent_after": spent_after,
            "timestamp": time.time(),
            "note": None,
        }
        self._apply_entry(entry)
        self._write_line(entry)
        return OutcomeRecord(
            sequence=entry["sequence"],
            kind="outcome",
            trial_id=str(trial.trial_id),
            spend_delta=spend_delta,
            spent=spent_after,
            budget=state.budget,
        )

    def record_adjustment(
        self, trial: TrialRecord, model, note: str
    ) -> OutcomeRecord:
        """Record a post-hoc adjustment (Bayesian mode only).

        Identical spend mechanics to a positive outcome, but flagged as
        an adjustment and requiring an explanatory note.  The adjustment
        fraction reported by ``status`` should stay small.
        """
        self._require_open()
        if self._mode != "bayes":
            raise LedgerError("adjustments are a bayes-mode operation")
        if not (isinstance(note, str) and note.strip()):
            raise LedgerError("an adjustment requires a non-empty note")
        state = self._resolve_stratum(trial.stratum)
        result = self._freeze(trial, model, require_positive=False)
        spend_delta = trial_contribution(result, self._endpoint_mode)
        spent_after = math.fsum(state.contributions + [spend_delta])
        entry = {
            "sequence": self._next_sequence,
            "kind": "adjustment",
            "trial_id": str(trial.trial_id),
            "stratum": trial.stratum,
            "payload": {
                "outcome": trial.outcome,
                "m": trial.m,
                "t": trial.failure_type.value,
                "z": list(result.z_values),
                "h": list(result.h_values),
            },
            "spend_delta": spend_delta,
            "spent_after": spent_after,
            "timestamp": time.time(),
            "note": note,
        }
        self._apply_entry(entry)
        self._write_line(entry)
        return OutcomeRecord(
            sequence=entry["sequence"],
            kind="adjustment",
            trial_id=str(trial.trial_id),
            spend_delta=spend_delta,
            spent=spent_after,
            budget=state.budget,
        )

    def status(self) -> dict:
        """Pure read of budgets, spend, and flags (plus per-stratum view)."""
        views = {
            name: self._stratum_view(state)
            for name, state in self._strata.items()
        }
        out = {
            "mode": self._mode,
            "n_entries": self._n_entries,
            "adjustment_count": self._n_adjustments,
            "adjustment_fraction": (
                self._n_adjustments / self._n_entries
                if self._n_entries
                else 0.0
            ),
        }
        if self._stratified:
            out["budget"] = math.fsum(v["budget"] for v in views.values())
            out["spent"] = math.fsum(v["spent"] for v in views.values())
            out["remaining"] = math.fsum(
                v["remaining"] for v in views.values()
            )
            out["n_trials"] = sum(v["n_trials"] for v in views.values())
            out["over_budget"] = any(
                v["over_budget"] for v in views.values()
            )
            out["strata"] = views
        else:
            out.update(views[None])
            out["strata"] = None
        return out

    def entries(self) -> tuple:
        """All applied entries, in sequence order."""
        return tuple(self._entries)

    def running_sums(self, stratum: str | None = None):
        """Reconstructable running sums, for replay verification.

        For a stratified ledger with ``stratum=None`` returns a mapping
        of per-stratum sums; otherwise the sums for the one stratum.
        """
        if self._stratified and stratum is None:
            return {
                name: self._sums_view(state)
                for name, state in self._strata.items()
            }
        return self._sums_view(self._resolve_stratum(stratum))

    @property
    def path(self) -> str:
        return self._path

    @property
    def mode(self) -> str:
        return self._mode

    @property
    def header(self) -> dict:
        return dict(self._header)

    def close(self) -> None:
        if self._fh is not None:
            self._fh.close()
            self._fh = None

    def __enter__(self) -> "Ledger":
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    # ------------------------------------------------------------------
    # Internals
    # ------------------------------------------------------------------

    def _sums_view(self, state: _StratumState) -> dict:
        if self._mode == "frequentist":
            return {
                "n": state.n_accepted,
                "sum_delta": math.fsum(state.deltas),
                "sum_alpha": math.fsum(state.alphas),
                "spent": state.freq_spent(),
            }
        return {
            "n_outcomes": state.n_outcomes,
            "n_positive": state.n_positive,
            "n_adjustments": state.n_adjustments,
            "contributions": tuple(state.contributions),
            "spent": state.bayes_spent(),
        }

    def _stratum_view(self, state: _StratumState) -> dict:
        if self._mode == "frequentist":
            spent = state.freq_spent()
            n_trials = state.n_accepted
        else:
            spent = state.bayes_spent()
            n_trials = state.n_outcomes + state.n_adjustments
        view = {
            "budget": state.budget,
            "spent": spent,
            "remaining": state.budget - spent,
            "n_trials": n_trials,
            "adjustment_count": state.n_adjustments,
            "over_budget": spent > state.budget,
        }
        if self._mode == "bayes":
            view["n_positive"] = state.n_positive
        if self._mode == "frequentist":
            # Equivalent remaining total error: the additional sum of
            # alpha the current trial mix could absorb.  With only
            # (m=1, type B) trials this is budget/rho_hat - sum(alpha).
            if state.n_accepted:
                capacity_alpha = (
                    state.budget * state.n_accepted / math.fsum(state.deltas)
                )
            else:
                capacity_alpha = state.budget / state.rho_hat
            view["remaining_total_error"] = capacity_alpha - math.fsum(
                state.alphas
            )
        return view

    def _freeze(
        self, trial: TrialRecord, model, require_positive: bool = True
    ) -> PositiveTrialResult:
        if model is None:
            raise LedgerError(
                "bayes mode requires the prior model to freeze h values"
            )
        if self._model_id is not None and model.model_id != self._model_id:
            raise LedgerError(
                f"model {model.model_id} does not match the pinned model "
                f"{self._model_id}"
            )
        if require_positive:
            return positive_result(trial, model)
        # Adjustments may rescue trials that missed their pre-registered
        # threshold, so the positive-outcome gate does not apply.
        from enfp.hcurve import h_probability

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

    def _resolve_stratum(self, stratum) -> _StratumState:
        if self._stratified:
            if stratum is None:
                raise LedgerError(
                    "stratified ledger requires a stratum label "
                    f"(one of {sorted(self._strata)})"
                )
            if stratum not in self._strata:
                raise LedgerError(f"unknown stratum {stratum!r}")
            return self._strata[stratum]
        # Unstratified ledgers pool everything into the single budget;
        # any stratum label is kept on the entry for audit only.
        return self._strata[None]

    def _apply_entry(self, entry: dict, lineno: int | None = None) -> None:
        where = (
            f"line {lineno}"
            if lineno is not None
            else f"entry {entry.get('sequence')}"
        )
        if entry.get("sequence") != self._next_sequence:
            raise LedgerCorruptError(
                f"{where}: sequence {entry.get('sequence')!r} breaks "
                f"contiguity (expected {self._next_sequence})"
            )
        stratum = entry.get("stratum")
        if self._stratified:
            if stratum not in self._strata:
                raise LedgerCorruptError(
                    f"{where}: unknown stratum {stratum!r}"
                )
            state = self._strata[stratum]
        else:
            state = self._strata[None]
        kind = entry.get("kind")
        payload = entry.get("payload") or {}
        try:
            if kind == "proposal":
                self._apply_proposal(entry, payload, state, where)
            elif kind in ("outcome", "adjustment"):
                self._apply_spendable(entry, payload, state, kind, where)
            else:
                raise LedgerCorruptError(
                    f"{where}: unknown entry kind {kind!r}"
                )
        except LedgerCorruptError:
            raise
        except (KeyError, TypeError, ValueError) as exc:
            raise LedgerCorruptError(f"{where}: malformed entry ({exc})") from exc
        self._entries.append(entry)
        self._n_entries += 1
        self._next_sequence += 1

    def _apply_proposal(self, entry, payload, state, where) -> None:
        if self._mode != "frequentist":
            raise LedgerCorruptError(
                f"{where}: proposal entry in a bayes-mode ledger"
            )
        d = delta(
            state.rho_hat, int(payload["m"]), FailureRegionType(payload["t"])
        )
        alpha = float(payload["alpha"])
        projected = (
            math.fsum(state.deltas + [d])
            * math.fsum(state.alphas + [alpha])
            / (state.n_accepted + 1)
        )
        if projected != entry.get("projected"):
            raise LedgerCorruptError(
                f"{where}: stored projected spend {entry.get('projected')!r} "
                f"does not replay ({projected!r})"
            )
        if projected > state.budget:
            raise LedgerCorruptError(
                f"{where}: accepted proposal exceeds the budget"
            )
        state.deltas.append(d)
        state.alphas.append(alpha)
        state.n_accepted += 1

    def _apply_spendable(self, entry, payload, state, kind, where) -> None:
        spend_delta = entry.get("spend_delta")
        if kind == "adjustment":
            if self._mode != "bayes":
                raise LedgerCorruptError(
                    f"{where}: adjustment entry in a frequentist ledger"
                )
            note = entry.get("note")
            if not (isinstance(note, str) and note.strip()):
                raise LedgerCorruptError(
                    f"{where}: adjustment entry lacks a note"
                )
        spends = kind == "adjustment" or (
            self._mode == "bayes" and payload.get("outcome") == "positive"
        )
        if spends:
            result = PositiveTrialResult(
                trial_id=str(entry.get("trial_id")),
                m=int(payload["m"]),
                failure_type=FailureRegionType(payload["t"]),
                z_values=tuple(float(z) for z in payload["z"]),
                h_values=tuple(float(h) for h in payload["h"]),
                stratum=entry.get("stratum"),
            )
            recomputed = trial_contribution(result, self._endpoint_mode)
            if recomputed != spend_delta:
                raise LedgerCorruptError(
                    f"{where}: stored spend delta {spend_delta!r} does not "
                    f"replay ({recomputed!r})"
                )
            spent_after = math.fsum(state.contributions + [recomputed])
            if spent_after != entry.get("spent_after"):
                raise LedgerCorruptError(
                    f"{where}: stored cumulative spend does not replay"
                )
            state.contributions.append(recomputed)
        elif spend_delta != 0.0:
            raise LedgerCorruptError(
                f"{where}: non-spending entry carries spend "
                f"{spend_delta!r}"
            )
        if kind == "outcome":
            state.n_outcomes += 1
            if payload.get("outcome") == "positive":
                state.n_positive += 1
        else:
            state.n_adjustments += 1
            self._n_adjustments += 1

    def _write_line(self, obj: dict) -> None:
        self._fh.write(
            json.dumps(obj, separators=(",", ":"), sort_keys=True) + "\n"
        )
        self._fh.flush()
        os.fsync(self._fh.fileno())

    def _require_open(self) -> None:
        if self._fh is None:
            raise LedgerError("ledger is closed")

    @staticmethod
    def _parse_line(raw: str, lineno: int) -> dict:
        try:
            obj = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise LedgerCorruptError(
                f"line {lineno}: invalid JSON ({exc})"
            ) from exc
        if not isinstance(obj, dict):
            raise LedgerCorruptError(f"line {lineno}: expected a JSON object")
        return obj
