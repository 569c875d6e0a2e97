"""Run configuration: one JSON document, overridable by CLI flags.

Recognized keys (all optional unless a command needs them):

    data, target          input CSV path and target signal
    groups                {"group name": ["signal", ...]}
    segments              {"segment name": ["group name", ...]}
    strategy              "grouped" | "routes" | "auto"
    include_base_signals  bool, grouped strategy signal-inclusion option
    min_support           float, auto route detection threshold
    uncommon_policy       "drop" | "merge_common"
    learner               {"kind", "ridge_lambda", "tree_max_depth",
                           "tree_min_leaf", "standardize"}
    mode                  "boosting" | "bagging"
    seed                  int, drives the train/test split and generation
    test_fraction         float
    coalesce              ["MERGED=SRC1,SRC2", ...]
    model_out, manifest_out, report_out, predictions_out, table_out
                          output paths used by the commands
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .errors import ConfigError
from .learners import LearnerConfig
from .subsetting import StrategyOptions

_LEARNER_KEYS = {
    "kind",
    "ridge_lambda",
    "tree_max_depth",
    "tree_min_leaf",
    "standardize",
}


@dataclass
class RunConfig:
    data: str | None = None
    target: str | None = None
    groups: dict[str, list[str]] | None = None
    segments: dict[str, list[str]] | None = None
    strategy: str = "grouped"
    include_base_signals: bool = True
    min_support: float = 0.05
    uncommon_policy: str = "drop"
    learner: dict[str, Any] = field(default_factory=dict)
    mode: str = "boosting"
    seed: int = 0
    test_fraction: float = 0.3
    coalesce: list[str] = field(default_factory=list)
    model_out: str | None = None
    manifest_out: str | None = None
    report_out: str | None = None
    predictions_out: str | None = None
    table_out: str | None = None

    def strategy_options(self) -> StrategyOptions:
        return StrategyOptions(
            strategy=self.strategy,
            groups=self.groups,
            segments=self.segments,
            include_base_signals=self.include_base_signals,
            min_support=self.min_support,
            uncommon_policy=self.uncommon_policy,
        )

    def learner_config(self, **defaults: Any) -> LearnerConfig:
        merged = dict(defaults)
        merged.update(self.learner)
        unknown = set(merged) - _LEARNER_KEYS
        if unknown:
            raise ConfigError(f"unknown learner options: {sorted(unknown)}")
        try:
            return LearnerConfig(**merged)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None


def load_run_config(path: str | Path | None) -> RunConfig:
    config = RunConfig()
    if path is None:
        return config
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: not valid JSON ({exc})") from None
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: config must be a JSON object")
    known = set(RunConfig.__dataclass_fields__)
    unknown = set(doc) - known
    if unknown:
        raise ConfigError(f"{path}: unknown config keys {sorted(unknown)}")
    for key, value in doc.items():
        setattr(config, key, value)
    return config


def parse_coalesce(directive: str) -> tuple[str, list[str]]:
    """Parse "MERGED=SRC1,SRC2" into (merged, sources)."""
    if "=" not in directive:
        raise ConfigError(f"coalesce directive {directive!r} must look like NEW=A,B")
    merged, _, rest = directive.partition("=")
    sources = [s for s in rest.split(",") if s]
    if not merged or not sources:
        raise ConfigError(f"coalesce directive {directive!r} must look like NEW=A,B")
    return merged, sources
