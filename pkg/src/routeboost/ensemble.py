"""Ensemble training, route-aware prediction, and stratified evaluation.

Boosting fits a chain of residual models over strictly nested subsets:
member 0 (the base model) predicts the target from the always-available
or narrowest feature set, and every later member predicts what the
prefix before it still gets wrong. Bagging fits independent members and
averages them. At prediction time only members whose entire feature set
is present are applied, so an item is scored with exactly the knowledge
its route produced.

The conventional baseline (complete-case deletion: drop every row with
any missing value, fit one model on all signals) is wrapped as a
one-member ensemble so the same prediction and evaluation machinery
applies.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .data import Dataset, SignalId
from .errors import (
    EmptyTrainingSet,
    NoApplicableModel,
    NotNested,
)
from .learners import (
    FittedLearner,
    LearnerConfig,
    fit,
    learner_from_dict,
    learner_to_dict,
)
from .subsetting import SubsetSpec, materialize, validate_nested_chain

ENSEMBLE_MODES = ("boosting", "bagging")


@dataclass(frozen=True)
class EnsembleMember:
    name: str
    features: tuple[SignalId, ...]
    learner: FittedLearner

    def __post_init__(self) -> None:
        if tuple(self.learner.features) != tuple(self.features):
            raise ValueError(
                f"member {self.name!r}: learner features do not match member features"
            )


@dataclass(frozen=True)
class EnsembleModel:
    """Ordered members plus the combination mode.

    For boosting, member 0 is the base model and must use a subset of
    every other member's features (strict nesting for plain chains; the
    branched variant keeps one base plus incomparable branch residuals).
    """

    mode: str
    target: SignalId
    members: tuple[EnsembleMember, ...]

    def __post_init__(self) -> None:
        if self.mode not in ENSEMBLE_MODES:
            raise ValueError(f"unknown ensemble mode {self.mode!r}")
        if not self.members:
            raise ValueError("an ensemble needs at least one member")
        if self.mode == "boosting":
            base = set(self.members[0].features)
            for m in self.members[1:]:
                if not base <= set(m.features):
                    raise NotNested(
                        f"base features are not a subset of member {m.name!r}"
                    )

    def applicable_members(self, row_signals: set[SignalId]) -> list[int]:
        """Indices of members whose entire feature set is present.

        For a nested boosting chain this is always a prefix of the member
        order. The target's presence is irrelevant.
        """
        return [
            i
            for i, m in enumerate(self.members)
            if set(m.features) <= row_signals
        ]

    def predict_with_members(
        self, row: Mapping[SignalId, float]
    ) -> tuple[float, list[str]]:
        """Prediction plus the names of the members that produced it."""
        present = set(row)
        applicable = self.applicable_members(present)
        if self.mode == "boosting":
            if not applicable or applicable[0] != 0:
                raise NoApplicableModel("base model inputs are not available")
        elif not applicable:
            raise NoApplicableModel("no member has all its inputs available")
        outputs = []
        for i in applicable:
            member = self.members[i]
            x = [row[s] for s in member.features]
            outputs.append(member.learner.predict_one(x))
        total = 0.0
        for v in outputs:
            total += v
        if self.mode == "bagging":
            total = total / len(outputs)
        return total, [self.members[i].name for i in applicable]

    def predict(self, row: Mapping[SignalId, float]) -> float:
        """Boosting: sum of the applicable prefix. Bagging: their mean."""
        value, _ = self.predict_with_members(row)
        return value


def _training_matrix(sub: Dataset, features: Sequence[SignalId]) -> np.ndarray:
    return np.column_stack([sub.column(f) for f in features])


def _prefix_predictions(
    members: Sequence[EnsembleMember], sub: Dataset
) -> np.ndarray:
    """Summed predictions of already-fitted members on a materialized subset."""
    total = np.zeros(sub.n_rows)
    for member in members:
        X = _training_matrix(sub, member.features)
        total += np.array(
            [member.learner.predict_one(X[i]) for i in range(sub.n_rows)]
        )
    return total


def train_boosting(
    dataset: Dataset, specs: Sequence[SubsetSpec], config: LearnerConfig
) -> EnsembleModel:
    """Fit a residual chain over strictly nested subsets.

    Members are ordered narrowest first; member k >= 1 is fit on its
    subset against the target minus the summed predictions of members
    0..k-1 (all evaluable there because of the nesting). Member 0 keeps
    the role name "base"; residual members keep their subset names.
    """
    chain = validate_nested_chain(specs)
    members: list[EnsembleMember] = []
    for k, spec in enumerate(chain):
        sub = materialize(dataset, spec)
        X = _training_matrix(sub, spec.features)
        y = sub.column(sub.target).copy()
        if members:
            y -= _prefix_predictions(members, sub)
        learner = fit(config, X, y, features=spec.features)
        name = "base" if k == 0 else spec.name
        members.append(EnsembleMember(name, spec.features, learner))
    return EnsembleModel("boosting", dataset.target, tuple(members))


def train_boosting_branched(
    dataset: Dataset, specs: Sequence[SubsetSpec], config: LearnerConfig
) -> EnsembleModel:
    """Base plus one single-step residual per branch.

    Covers layouts with mutually exclusive branches (grouped-signal
    subsets): the unique narrowest spec must be a strict subset of every
    other spec; each branch residual is fit against the base alone. Rows
    of different branches are mutually exclusive in route-driven data,
    so at most one branch correction applies per row.
    """
    if not specs:
        raise ValueError("branched boosting needs at least one subset")
    ordered = sorted(specs, key=lambda s: (len(s.features), s.name))
    base_spec, branch_specs = ordered[0], ordered[1:]
    for spec in branch_specs:
        if not base_spec.feature_set < spec.feature_set:
            raise NotNested(
                f"branch {spec.name!r} does not contain the base features"
            )
    base_sub = materialize(dataset, base_spec)
    base_learner = fit(
        config,
        _training_matrix(base_sub, base_spec.features),
        base_sub.column(base_sub.target),
        features=base_spec.features,
    )
    members = [EnsembleMember("base", base_spec.features, base_learner)]
    for spec in branch_specs:
        sub = materialize(dataset, spec)
        y = sub.column(sub.target) - _prefix_predictions(members[:1], sub)
        learner = fit(
            config, _training_matrix(sub, spec.features), y, features=spec.features
        )
        members.append(EnsembleMember(spec.name, spec.features, learner))
    return EnsembleModel("boosting", dataset.target, tuple(members))


def train_bagging(
    dataset: Dataset, specs: Sequence[SubsetSpec], config: LearnerConfig
) -> EnsembleModel:
    """Independent members, one per subset, each predicting the target."""
    if not specs:
        raise ValueError("bagging needs at least one subset")
    members = []
    for spec in specs:
        sub = materialize(dataset, spec)
        learner = fit(
            config,
            _training_matrix(sub, spec.features),
            sub.column(sub.target),
            features=spec.features,
        )
        members.append(EnsembleMember(spec.name, spec.features, learner))
    return EnsembleModel("bagging", dataset.target, tuple(members))


def complete_case_rows(dataset: Dataset) -> np.ndarray:
    """Rows with every signal (target included) present."""
    return np.flatnonzero(dataset.availability_mask().all(axis=1))


def train_conventional(dataset: Dataset, config: LearnerConfig) -> EnsembleModel:
    """Complete-case baseline: listwise deletion, one model on all signals."""
    if dataset.target is None:
        raise ValueError("train_conventional requires a dataset with a target")
    rows = complete_case_rows(dataset)
    if rows.size == 0:
        raise EmptyTrainingSet("no row is free of missing values")
    features = tuple(s for s in dataset.signals if s != dataset.target)
    sub = dataset.project(dataset.signals, rows)
    learner = fit(
        config,
        _training_matrix(sub, features),
        sub.column(dataset.target),
        features=features,
    )
    member = EnsembleMember("conventional", features, learner)
    return EnsembleModel("bagging", dataset.target, (member,))


# --- evaluation ---------------------------------------------------------------

@dataclass(frozen=True)
class MetricRow:
    n: int
    mae: float | None
    r2: float | None  # None means undefined (zero target variance)
    n_no_model: int = 0

    def to_dict(self) -> dict:
        return {"n": self.n, "mae": self.mae, "r2": self.r2, "n_no_model": self.n_no_model}


@dataclass(frozen=True)
class StratifiedMetrics:
    """Per-stratum and overall accuracy.

    Rows are assigned to the most specific matching stratum (largest
    feature set first). Rows without a present target, without any
    matching stratum, or without any applicable member are excluded from
    the metrics and reported as counts.
    """

    strata: tuple[tuple[str, MetricRow], ...]
    overall: MetricRow
    skipped_missing_target: int
    skipped_no_stratum: int

    def stratum(self, name: str) -> MetricRow:
        for n, row in self.strata:
            if n == name:
                return row
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {
            "strata": {name: row.to_dict() for name, row in self.strata},
            "overall": self.overall.to_dict(),
            "skipped_missing_target": self.skipped_missing_target,
            "skipped_no_stratum": self.skipped_no_stratum,
        }


def _metric_row(y: list[float], pred: list[float], n_no_model: int) -> MetricRow:
    if not y:
        return MetricRow(0, None, None, n_no_model)
    ya = np.array(y)
    pa = np.array(pred)
    mae = float(np.mean(np.abs(ya - pa)))
    sst = float(np.sum((ya - ya.mean()) ** 2))
    if sst == 0.0:
        return MetricRow(len(y), mae, None, n_no_model)
    sse = float(np.sum((ya - pa) ** 2))
    return MetricRow(len(y), mae, 1.0 - sse / sst, n_no_model)


def evaluate(
    model: EnsembleModel, dataset: Dataset, strata: Sequence[SubsetSpec]
) -> StratifiedMetrics:
    """MAE and R-squared per availability stratum plus an overall row.

    R-squared uses each stratum's own target mean; a constant-target
    stratum reports it as undefined (None) while the MAE is still
    computed.
    """
    if dataset.target is None:
        raise ValueError("evaluate requires a dataset with a target")
    order = sorted(strata, key=lambda s: (-len(s.features), s.name))
    collected: dict[str, tuple[list[float], list[float]]] = {
        s.name: ([], []) for s in order
    }
    no_model: dict[str, int] = {s.name: 0 for s in order}
    skipped_missing_target = 0
    skipped_no_stratum = 0
    mask = dataset.availability_mask()
    target_col = dataset.index(dataset.target)
    for i in range(dataset.n_rows):
        if not mask[i, target_col]:
            skipped_missing_target += 1
            continue
        row = dataset.row_values(i)
        present = set(row)
        stratum = next(
            (s for s in order if s.feature_set <= present), None
        )
        if stratum is None:
            skipped_no_stratum += 1
            continue
        y = row.pop(dataset.target)
        try:
            pred = model.predict(row)
        except NoApplicableModel:
            no_model[stratum.name] += 1
            continue
        ys, preds = collected[stratum.name]
        ys.append(y)
        preds.append(pred)

    rows = []
    all_y: list[float] = []
    all_pred: list[float] = []
    for spec in strata:  # report in the caller's stratum order
        ys, preds = collected[spec.name]
        rows.append((spec.name, _metric_row(ys, preds, no_model[spec.name])))
        all_y.extend(ys)
        all_pred.extend(preds)
    overall = _metric_row(all_y, all_pred, sum(no_model.values()))
    return StratifiedMetrics(
        tuple(rows), overall, skipped_missing_target, skipped_no_stratum
    )


def train_test_split_rows(
    n_rows: int, test_fraction: float, seed: int
) -> tuple[np.ndarray, np.ndarray]:
    """Deterministic pseudo-random row split; indices are returned sorted."""
    if not 0.0 <= test_fraction <= 1.0:
        raise ValueError("test_fraction must be within [0, 1]")
    rng = np.random.default_rng(seed)
    perm = rng.permutation(n_rows)
    n_test = int(round(n_rows * test_fraction))
    test = np.sort(perm[:n_test])
    train = np.sort(perm[n_test:])
    return train, test


# --- persistence --------------------------------------------------------------

def model_to_dict(model: EnsembleModel) -> dict:
    return {
        "mode": model.mode,
        "target": model.target,
        "members": [
            {
                "name": m.name,
                "features": list(m.features),
                "learner": learner_to_dict(m.learner),
            }
            for m in model.members
        ],
    }


def model_from_dict(d: dict) -> EnsembleModel:
    members = tuple(
        EnsembleMember(
            m["name"], tuple(m["features"]), learner_from_dict(m["learner"])
        )
        for m in d["members"]
    )
    return EnsembleModel(d["mode"], d["target"], members)


def save_model(model: EnsembleModel, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(model_to_dict(model), fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_model(path) -> EnsembleModel:
    with open(path, "r", encoding="utf-8") as fh:
        return model_from_dict(json.load(fh))
