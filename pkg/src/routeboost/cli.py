"""Command-line interface.

Subcommands: analyze, subset, train, predict, evaluate, generate, and
benchmark. Exit codes: 0 success, 1 domain error (e.g. a non-nested
chain), 2 input/config error. All randomness flows from --seed
(default 0); reruns with the same inputs produce byte-identical JSON.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

from . import __version__
from .analysis import (
    always_available_signals,
    infer_signal_groups,
    pattern_summary,
    route_frequencies,
)
from .benchmark import benchmark_learner_config, run_benchmark, train_proposed
from .config import RunConfig, load_run_config, parse_coalesce
from .data import Dataset, coalesce_signals, load_dataset, load_table, write_csv
from .ensemble import (
    evaluate,
    load_model,
    model_to_dict,
    save_model,
    train_bagging,
)
from .errors import DomainError, InputError, NoApplicableModel
from .subsetting import (
    SubsetSpec,
    build_subset_specs,
    resolve_groups,
    subset_rows,
)
from .synthgen import GenSpec, default_layout, generate, layout_from_dict


def _write_json(path: str | Path, obj) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(obj, indent=2, sort_keys=True))
        fh.write("\n")


def _apply_config(args: argparse.Namespace) -> RunConfig:
    config = load_run_config(getattr(args, "config", None))
    for key in (
        "data",
        "target",
        "strategy",
        "mode",
        "seed",
        "test_fraction",
        "min_support",
        "uncommon_policy",
    ):
        value = getattr(args, key, None)
        if value is not None:
            setattr(config, key, value)
    if getattr(args, "group_signals_only", False):
        config.include_base_signals = False
    learner_flags = {
        "kind": getattr(args, "learner", None),
        "ridge_lambda": getattr(args, "ridge_lambda", None),
        "tree_max_depth": getattr(args, "tree_max_depth", None),
        "tree_min_leaf": getattr(args, "tree_min_leaf", None),
    }
    for key, value in learner_flags.items():
        if value is not None:
            config.learner[key] = value
    if getattr(args, "standardize", False):
        config.learner["standardize"] = True
    if getattr(args, "coalesce", None):
        config.coalesce = list(config.coalesce) + list(args.coalesce)
    for flag, key in (
        ("model_out", "model_out"),
        ("manifest_out", "manifest_out"),
        ("out_json", "report_out"),
        ("out_table", "table_out"),
    ):
        value = getattr(args, flag, None)
        if value is not None:
            setattr(config, key, value)
    return config


def _load_input(config: RunConfig, need_target: bool = True) -> Dataset:
    if not config.data:
        raise InputError("no input data file given (use --data or the config)")
    if need_target:
        if not config.target:
            raise InputError("no target signal given (use --target or the config)")
        dataset = load_dataset(config.data, config.target)
    else:
        dataset = load_table(config.data)
    for directive in config.coalesce:
        merged, sources = parse_coalesce(directive)
        dataset = coalesce_signals(dataset, merged, sources)
    return dataset


def _spec_manifest(dataset: Dataset, specs: list[SubsetSpec]) -> list[dict]:
    return [
        {
            "name": s.name,
            "features": list(s.features),
            "n_rows": int(subset_rows(dataset, s).size),
        }
        for s in specs
    ]


# --- subcommands -----------------------------------------------------------


def cmd_analyze(args: argparse.Namespace) -> int:
    config = _apply_config(args)
    dataset = _load_input(config)
    patterns = pattern_summary(dataset)
    groups = resolve_groups(dataset, config.groups)
    always = always_available_signals(dataset)
    routes = route_frequencies(dataset, groups)

    print(f"rows: {dataset.n_rows}  signals: {len(dataset.signals)}")
    print("\navailability patterns (count desc):")
    for p in patterns:
        print(f"  {p.count:>7}  {{{', '.join(sorted(p.present))}}}")
    print("\nsignal groups:")
    for g in groups:
        print(f"  {g.name}: {', '.join(g.members)}")
    print(f"\nalways available: {{{', '.join(sorted(always))}}}")
    print("\nroute frequencies (count desc):")
    for r in routes:
        label = ", ".join(sorted(r.groups_present)) or "<none>"
        print(f"  {r.count:>7}  {{{label}}}")

    out = args.out or config.report_out
    if out:
        _write_json(
            out,
            {
                "n_rows": dataset.n_rows,
                "signals": list(dataset.signals),
                "target": dataset.target,
                "patterns": [
                    {"signals": sorted(p.present), "count": p.count} for p in patterns
                ],
                "groups": [
                    {"name": g.name, "members": list(g.members)} for g in groups
                ],
                "always_available": sorted(always),
                "routes": [
                    {"groups": sorted(r.groups_present), "count": r.count}
                    for r in routes
                ],
            },
        )
    return 0


def cmd_subset(args: argparse.Namespace) -> int:
    config = _apply_config(args)
    dataset = _load_input(config)
    specs, _ = build_subset_specs(dataset, config.strategy_options())
    manifest = _spec_manifest(dataset, specs)
    for entry in manifest:
        print(
            f"{entry['name']}: {entry['n_rows']} rows x "
            f"{len(entry['features'])} features ({', '.join(entry['features'])})"
        )
    out = args.out or config.manifest_out
    if out:
        _write_json(out, manifest)
    return 0


def cmd_train(args: argparse.Namespace) -> int:
    config = _apply_config(args)
    dataset = _load_input(config)
    specs, _ = build_subset_specs(dataset, config.strategy_options())
    learner = config.learner_config()
    if config.mode == "bagging":
        model = train_bagging(dataset, specs, learner)
    else:
        model = train_proposed(dataset, specs, learner, "boosting")
    manifest = _spec_manifest(dataset, specs)
    for entry in manifest:
        print(f"member subset {entry['name']}: {entry['n_rows']} training rows")
    if not config.model_out:
        raise InputError("no model output path (use --model-out or the config)")
    save_model(model, config.model_out)
    print(
        f"saved {config.mode} model with {len(model.members)} members "
        f"to {config.model_out}"
    )
    if config.manifest_out:
        _write_json(config.manifest_out, manifest)
    return 0


def cmd_predict(args: argparse.Namespace) -> int:
    config = _apply_config(args)
    model = load_model(args.model)
    config.target = config.target or model.target
    table = _load_input(config, need_target=False)
    out = args.out or config.predictions_out
    if not out:
        raise InputError("no predictions output path (use --out or the config)")
    with open(out, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["prediction", "members", "reason"])
        n_ok = 0
        for i in range(table.n_rows):
            row = table.row_values(i)
            row.pop(model.target, None)
            try:
                value, names = model.predict_with_members(row)
            except NoApplicableModel:
                writer.writerow(["", "", "no-applicable-model"])
                continue
            writer.writerow([repr(value), ",".join(names), ""])
            n_ok += 1
    print(f"predicted {n_ok}/{table.n_rows} rows -> {out}")
    return 0


def cmd_evaluate(args: argparse.Namespace) -> int:
    config = _apply_config(args)
    model = load_model(args.model)
    config.target = config.target or model.target
    dataset = _load_input(config)
    if args.strata:
        with open(args.strata, "r", encoding="utf-8") as fh:
            manifest = json.load(fh)
        strata = [SubsetSpec(e["name"], tuple(e["features"])) for e in manifest]
    else:
        strata = [SubsetSpec(m.name, m.features) for m in model.members]
    metrics = evaluate(model, dataset, strata)

    names = [name for name, _ in metrics.strata] + ["overall"]
    rows = [row for _, row in metrics.strata] + [metrics.overall]
    width = max(10, max(len(n) for n in names) + 2)
    print("".ljust(8) + "".join(n.title().rjust(width) for n in names))
    for label, pick in (
        ("MAE", lambda r: "n/a" if r.mae is None else f"{r.mae:.3f}"),
        ("R2", lambda r: ("n/a" if r.n == 0 else "undef") if r.r2 is None else f"{r.r2:.3f}"),
        ("n", lambda r: str(r.n)),
    ):
        print(label.ljust(8) + "".join(pick(r).rjust(width) for r in rows))
    print(
        f"skipped: {metrics.skipped_missing_target} missing target, "
        f"{metrics.skipped_no_stratum} without stratum, "
        f"{metrics.overall.n_no_model} without applicable model"
    )
    out = args.out or config.report_out
    if out:
        _write_json(out, metrics.to_dict())
    return 0


def cmd_generate(args: argparse.Namespace) -> int:
    if args.layout:
        with open(args.layout, "r", encoding="utf-8") as fh:
            layout = layout_from_dict(json.load(fh))
    else:
        layout = default_layout()
    dataset = generate(GenSpec(layout, args.rows, args.seed if args.seed is not None else 0))
    write_csv(dataset, args.out)
    print(f"wrote {dataset.n_rows} rows x {len(dataset.signals)} signals to {args.out}")
    return 0


def cmd_benchmark(args: argparse.Namespace) -> int:
    config = _apply_config(args)
    if args.synthetic:
        layout = default_layout()
        dataset = generate(GenSpec(layout, args.rows, config.seed))
        if config.segments is None and config.strategy == "grouped":
            # Route segments straight from the layout; one group per unit.
            config.strategy = "routes"
            config.groups = {
                u.name: [s.name for s in u.signals] for u in layout.units
            }
            config.segments = {r.name: list(r.units) for r in layout.routes}
    else:
        dataset = _load_input(config)

    learner = benchmark_learner_config(
        config.learner.get("kind", "ridge"),
        **{k: v for k, v in config.learner.items() if k != "kind"},
    )
    report = run_benchmark(
        dataset,
        config.strategy_options(),
        learner,
        mode=config.mode,
        seed=config.seed,
        test_fraction=config.test_fraction,
    )
    print(report.table())
    if config.report_out:
        _write_json(config.report_out, report.to_dict())
    if config.table_out:
        Path(config.table_out).write_text(report.table() + "\n", encoding="utf-8")
    return 0


# --- parser ------------------------------------------------------------------


def _add_common_data_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON run config; flags override its fields")
    p.add_argument("--data", help="input CSV file")
    p.add_argument("--target", help="target signal name")
    p.add_argument(
        "--coalesce",
        action="append",
        metavar="NEW=A,B",
        help="fuse interchangeable signals before any analysis (repeatable)",
    )


def _add_strategy_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--strategy", choices=["grouped", "routes", "auto"])
    p.add_argument(
        "--group-signals-only",
        action="store_true",
        help="grouped strategy: subsets use only the group's own signals",
    )
    p.add_argument("--min-support", type=float, dest="min_support")
    p.add_argument(
        "--uncommon-policy",
        choices=["drop", "merge_common"],
        dest="uncommon_policy",
    )


def _add_learner_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--learner", choices=["mean", "ridge", "tree"])
    p.add_argument("--ridge-lambda", type=float, dest="ridge_lambda")
    p.add_argument("--tree-max-depth", type=int, dest="tree_max_depth")
    p.add_argument("--tree-min-leaf", type=int, dest="tree_min_leaf")
    p.add_argument("--standardize", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="routeboost",
        description="Route-aware ensemble regression for data with systematic missing values",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="summarize missingness structure")
    _add_common_data_flags(p)
    p.add_argument("--out", help="write the JSON report here")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("subset", help="build subset specs and report them")
    _add_common_data_flags(p)
    _add_strategy_flags(p)
    p.add_argument("--out", help="write the subset manifest (JSON) here")
    p.set_defaults(func=cmd_subset)

    p = sub.add_parser("train", help="train an ensemble model")
    _add_common_data_flags(p)
    _add_strategy_flags(p)
    _add_learner_flags(p)
    p.add_argument("--mode", choices=["boosting", "bagging"])
    p.add_argument("--model-out", dest="model_out")
    p.add_argument("--manifest-out", dest="manifest_out")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="predict rows with a saved model")
    _add_common_data_flags(p)
    p.add_argument("--model", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("evaluate", help="stratified MAE/R2 of a saved model")
    _add_common_data_flags(p)
    p.add_argument("--model", required=True)
    p.add_argument("--strata", help="subset manifest defining the strata")
    p.add_argument("--out", help="write metrics JSON here")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("generate", help="generate a synthetic plant dataset")
    p.add_argument("--out", required=True)
    p.add_argument("--rows", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--layout", help="JSON layout file (default: built-in plant)")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser(
        "benchmark", help="compare the ensemble against the complete-case baseline"
    )
    _add_common_data_flags(p)
    _add_strategy_flags(p)
    _add_learner_flags(p)
    p.add_argument("--mode", choices=["boosting", "bagging"])
    p.add_argument("--synthetic", action="store_true", help="use generated plant data")
    p.add_argument("--rows", type=int, default=10000)
    p.add_argument("--test-fraction", type=float, dest="test_fraction")
    p.add_argument("--out-json", dest="out_json")
    p.add_argument("--out-table", dest="out_table")
    p.set_defaults(func=cmd_benchmark)

    for sp in sub.choices.values():
        if any(a.dest == "seed" for a in sp._actions):
            continue
        sp.add_argument("--seed", type=int, help="seed for splits and generation")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except json.JSONDecodeError as exc:
        print(f"error: malformed JSON input ({exc})", file=sys.stderr)
        return 2


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
