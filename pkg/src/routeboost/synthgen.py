"""Deterministic generator of production-line datasets.

Each generated item follows one production route sampled by probability;
only signals of traversed units get values, everything else stays
missing, and the target is a linear function of the traversed signals
plus Gaussian noise. Missingness is therefore exactly route-determined,
the structure that route-aware ensembles exploit.

Randomness is counter-based (Philox) with one substream per (seed, row),
so streams are reproducible across platforms and generating more rows
never reshuffles earlier ones.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Mapping, Sequence

import numpy as np

from .data import Dataset, SignalId
from .errors import InvalidLayout

PROBABILITY_TOL = 1e-9


@dataclass(frozen=True)
class SignalSpec:
    """One sensor channel: name plus value distribution.

    ``dist`` is ("normal", mean, sd) or ("uniform", low, high).
    """

    name: SignalId
    dist: tuple

    def validate(self) -> None:
        kind = self.dist[0] if self.dist else None
        if kind == "normal":
            _, _, sd = self.dist
            if sd < 0:
                raise InvalidLayout(f"signal {self.name!r}: negative sd")
        elif kind == "uniform":
            _, lo, hi = self.dist
            if hi < lo:
                raise InvalidLayout(f"signal {self.name!r}: empty uniform range")
        else:
            raise InvalidLayout(f"signal {self.name!r}: unknown distribution {kind!r}")


@dataclass(frozen=True)
class Unit:
    name: str
    signals: tuple[SignalSpec, ...]


@dataclass(frozen=True)
class Route:
    name: str
    units: tuple[str, ...]
    probability: float


@dataclass(frozen=True)
class TargetRule:
    """Linear target: intercept + sum of coeff * value over traversed signals.

    Signals of units an item did not visit contribute nothing; their
    causal effect exists only when the unit is visited.
    """

    target: SignalId
    intercept: float
    coefficients: Mapping[SignalId, float]
    noise_sigma: float


@dataclass(frozen=True)
class PlantLayout:
    units: tuple[Unit, ...]
    routes: tuple[Route, ...]
    target_rule: TargetRule

    def validate(self) -> None:
        unit_names = [u.name for u in self.units]
        if len(set(unit_names)) != len(unit_names):
            raise InvalidLayout("unit names must be unique")
        signals = self.signal_names()
        if len(set(signals)) != len(signals):
            raise InvalidLayout("signal names must be globally unique")
        if self.target_rule.target in signals:
            raise InvalidLayout("target name collides with a unit signal")
        for unit in self.units:
            for sig in unit.signals:
                sig.validate()
        if not self.routes:
            raise InvalidLayout("layout declares no routes")
        total = 0.0
        for route in self.routes:
            if route.probability <= 0:
                raise InvalidLayout(f"route {route.name!r}: non-positive probability")
            total += route.probability
            for name in route.units:
                if name not in unit_names:
                    raise InvalidLayout(f"route {route.name!r}: unknown unit {name!r}")
        if abs(total - 1.0) > PROBABILITY_TOL:
            raise InvalidLayout(f"route probabilities sum to {total!r}, expected 1")
        for name in self.target_rule.coefficients:
            if name not in signals:
                raise InvalidLayout(f"coefficient references unknown signal {name!r}")
        if self.target_rule.noise_sigma < 0:
            raise InvalidLayout("noise_sigma must be non-negative")

    def signal_names(self) -> list[SignalId]:
        return [sig.name for unit in self.units for sig in unit.signals]

    def unit(self, name: str) -> Unit:
        for unit in self.units:
            if unit.name == name:
                return unit
        raise InvalidLayout(f"unknown unit {name!r}")

    def route_signals(self, route: Route) -> set[SignalId]:
        out: set[SignalId] = set()
        for name in route.units:
            out.update(sig.name for sig in self.unit(name).signals)
        return out


@dataclass(frozen=True)
class GenSpec:
    layout: PlantLayout
    n_rows: int
    seed: int

    def __post_init__(self) -> None:
        if self.n_rows < 1:
            raise InvalidLayout("n_rows must be at least 1")
        if not 0 <= self.seed < 2**64:
            raise InvalidLayout("seed must be an unsigned 64-bit integer")


# Calibrated so that, with the benchmark's default ridge penalty, the wide
# stratum is the most predictable, the narrow stratum lands near R2 0.55,
# and the route-aware chain clearly outperforms the complete-case baseline.
DEFAULT_NOISE_SIGMA = 1.55

_UNIT3 = math.sqrt(3.0)  # half-width of a variance-1 uniform


def default_layout(noise_sigma: float | None = None) -> PlantLayout:
    """Steel-line style layout: 7 units, 2 signals each, 3 routes.

    Routes: narrow (PLTCM, CAL) probability 0.5, balanced (HSM1, PLTCM,
    CAL) probability 0.3, wide (all units) probability 0.2; the route
    signal sets are strictly nested. Every signal carries a nonzero
    target coefficient, with enough weight upstream that items on the
    wide route are strictly more predictable.
    """
    if noise_sigma is None:
        noise_sigma = DEFAULT_NOISE_SIGMA

    def normal(name: str) -> SignalSpec:
        return SignalSpec(name, ("normal", 0.0, 1.0))

    units = (
        Unit("DES", (normal("DES_1"), SignalSpec("DES_2", ("uniform", -_UNIT3, _UNIT3)))),
        Unit("BOF", (normal("BOF_1"), normal("BOF_2"))),
        Unit("CCM", (normal("CCM_1"), normal("CCM_2"))),
        Unit("RHLF", (normal("RHLF_1"), normal("RHLF_2"))),
        Unit("HSM1", (normal("HSM1_1"), normal("HSM1_2"))),
        Unit("PLTCM", (normal("PLTCM_1"), normal("PLTCM_2"))),
        Unit("CAL", (normal("CAL_1"), normal("CAL_2"))),
    )
    routes = (
        Route("narrow", ("PLTCM", "CAL"), 0.5),
        Route("balanced", ("HSM1", "PLTCM", "CAL"), 0.3),
        Route("wide", ("DES", "BOF", "CCM", "RHLF", "HSM1", "PLTCM", "CAL"), 0.2),
    )
    coefficients = {
        "DES_1": 0.81,
        "DES_2": 0.69,
        "BOF_1": 0.75,
        "BOF_2": 0.75,
        "CCM_1": 0.78,
        "CCM_2": 0.72,
        "RHLF_1": 0.75,
        "RHLF_2": 0.83,
        "HSM1_1": 0.9,
        "HSM1_2": 0.8,
        "PLTCM_1": 1.0,
        "PLTCM_2": 0.8,
        "CAL_1": 0.9,
        "CAL_2": 0.7,
    }
    rule = TargetRule("Y", 5.0, coefficients, noise_sigma)
    layout = PlantLayout(units, routes, rule)
    layout.validate()
    return layout


def _row_rng(seed: int, row: int) -> np.random.Generator:
    # 128-bit Philox key: high word = dataset seed, low word = row index.
    return np.random.Generator(np.random.Philox(key=(int(seed) << 64) | int(row)))


def _sample(sig: SignalSpec, rng: np.random.Generator) -> float:
    kind = sig.dist[0]
    if kind == "normal":
        _, mean, sd = sig.dist
        return float(mean + sd * rng.standard_normal())
    _, lo, hi = sig.dist
    return float(lo + (hi - lo) * rng.random())


def generate(spec: GenSpec) -> Dataset:
    """Sample a dataset; fully determined by the layout, n_rows, and seed."""
    layout = spec.layout
    layout.validate()
    signals = layout.signal_names()
    target = layout.target_rule.target
    columns = tuple(signals) + (target,)
    col_index = {name: j for j, name in enumerate(columns)}
    cum = np.cumsum([r.probability for r in layout.routes])
    values = np.full((spec.n_rows, len(columns)), np.nan)
    coeffs = layout.target_rule.coefficients
    for i in range(spec.n_rows):
        rng = _row_rng(spec.seed, i)
        pick = rng.random()
        route_idx = int(np.searchsorted(cum, pick, side="right"))
        route_idx = min(route_idx, len(layout.routes) - 1)
        route = layout.routes[route_idx]
        traversed = set(route.units)
        total = layout.target_rule.intercept
        for unit in layout.units:
            if unit.name not in traversed:
                continue
            for sig in unit.signals:
                value = _sample(sig, rng)
                values[i, col_index[sig.name]] = value
                total += coeffs.get(sig.name, 0.0) * value
        noise = float(rng.standard_normal())
        values[i, col_index[target]] = total + layout.target_rule.noise_sigma * noise
    return Dataset(columns, values, target)


def route_of_row(layout: PlantLayout, dataset: Dataset, row: int) -> Route | None:
    """The unique route whose signal set matches a row's availability."""
    present = dataset.present_signals(row) - {dataset.target}
    for route in layout.routes:
        if layout.route_signals(route) == present:
            return route
    return None


# --- JSON layout configs --------------------------------------------------------

def layout_to_dict(layout: PlantLayout) -> dict:
    return {
        "units": [
            {
                "name": u.name,
                "signals": [{"name": s.name, "dist": list(s.dist)} for s in u.signals],
            }
            for u in layout.units
        ],
        "routes": [
            {"name": r.name, "units": list(r.units), "probability": r.probability}
            for r in layout.routes
        ],
        "target_rule": {
            "target": layout.target_rule.target,
            "intercept": layout.target_rule.intercept,
            "coefficients": dict(layout.target_rule.coefficients),
            "noise_sigma": layout.target_rule.noise_sigma,
        },
    }


def layout_from_dict(d: dict) -> PlantLayout:
    try:
        units = tuple(
            Unit(
                u["name"],
                tuple(SignalSpec(s["name"], tuple(s["dist"])) for s in u["signals"]),
            )
            for u in d["units"]
        )
        routes = tuple(
            Route(r["name"], tuple(r["units"]), float(r["probability"]))
            for r in d["routes"]
        )
        rule = d["target_rule"]
        layout = PlantLayout(
            units,
            routes,
            TargetRule(
                rule["target"],
                float(rule["intercept"]),
                {k: float(v) for k, v in rule["coefficients"].items()},
                float(rule["noise_sigma"]),
            ),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidLayout(f"malformed layout document: {exc}") from None
    layout.validate()
    return layout


def with_noise_sigma(layout: PlantLayout, noise_sigma: float) -> PlantLayout:
    return replace(layout, target_rule=replace(layout.target_rule, noise_sigma=noise_sigma))
