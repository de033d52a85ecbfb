"""Command line front end.

Exit codes: 0 on success, 2 for configuration problems (bad flags, bad
config file), 3 for data problems (unreadable manifest, malformed files).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .bench import (
    ABLATION_AXES,
    format_ablation,
    format_repeats,
    run_ablation,
    run_benchmark,
    run_repeats,
    write_report_files,
)
from .config import MatchConfig
from .errors import ConfigError, DataError
from .fixtures import make_benchmark_fixture, make_exact_fixture, make_mini_fixture
from .matchers import MATCHER_CLASSES


def _add_run_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--manifest", required=True, help="dataset manifest (JSON)")
    p.add_argument("--config", help="JSON file of matcher settings")
    p.add_argument("--out", required=True, help="directory for reports")
    p.add_argument("--seed", type=int, help="override the subsampling seed")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cpe", description="set-to-set matching over precomputed embeddings"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    classify = sub.add_parser("classify", help="run one benchmark and write reports")
    _add_run_args(classify)
    classify.add_argument(
        "--matcher",
        choices=sorted(MATCHER_CLASSES) + ["pointwise-baseline"],
        help="override the configured matcher",
    )
    classify.add_argument(
        "--no-view-selection",
        action="store_true",
        help="keep every candidate view instead of the attention cut",
    )

    ablate = sub.add_parser("ablate", help="sweep one setting across values")
    _add_run_args(ablate)
    ablate.add_argument("--axis", required=True, choices=ABLATION_AXES)
    ablate.add_argument("--values", required=True, help="comma-separated sweep values")

    repeats = sub.add_parser("repeats", help="repeat a run across seeds")
    _add_run_args(repeats)
    repeats.add_argument("--seeds", required=True, help="comma-separated integer seeds")

    fixture = sub.add_parser("make-fixture", help="generate a synthetic dataset")
    fixture.add_argument("--kind", required=True, choices=["exact", "benchmark", "mini"])
    fixture.add_argument("--out", required=True, help="directory to create the dataset in")
    fixture.add_argument("--seed", type=int, default=None)
    return parser


def _config_from_args(args) -> MatchConfig:
    if args.config:
        try:
            config = MatchConfig.from_json_file(args.config)
        except OSError as exc:
            raise ConfigError(f"cannot read config file: {exc}") from exc
    else:
        config = MatchConfig()
    overrides = {}
    if getattr(args, "matcher", None):
        overrides["matcher"] = args.matcher
    if getattr(args, "no_view_selection", False):
        overrides["select_views"] = False
    if args.seed is not None:
        overrides["seed"] = args.seed
    return config.replace(**overrides) if overrides else config


def _parse_values(axis: str, raw: str) -> list:
    parts = [p.strip() for p in raw.split(",") if p.strip()]
    if not parts:
        raise ConfigError("--values must name at least one value")
    if axis == "matcher":
        return parts
    try:
        return [int(p) for p in parts]
    except ValueError as exc:
        raise ConfigError(f"--values for {axis} must be integers: {raw!r}") from exc


def _parse_seeds(raw: str) -> list[int]:
    parts = [p.strip() for p in raw.split(",") if p.strip()]
    try:
        seeds = [int(p) for p in parts]
    except ValueError as exc:
        raise ConfigError(f"--seeds must be integers: {raw!r}") from exc
    if len(seeds) < 2:
        raise ConfigError("--seeds needs at least 2 entries")
    return seeds


def _cmd_classify(args) -> int:
    config = _config_from_args(args)
    report = run_benchmark(args.manifest, config)
    write_report_files(report, args.out)
    sys.stdout.write(
        f"{report.dataset}: top-1 {report.top1_accuracy:.4f} "
        f"over {report.n_images} images\n"
    )
    return 0


def _cmd_ablate(args) -> int:
    config = _config_from_args(args)
    values = _parse_values(args.axis, args.values)
    reports = run_ablation(args.manifest, config, args.axis, values)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    for value, report in zip(values, reports):
        write_report_files(report, out_dir / f"{args.axis}-{value}")
    payload = {
        "axis": args.axis,
        "values": values,
        "reports": [r.to_dict() for r in reports],
    }
    (out_dir / "ablation.json").write_text(
        json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    table = format_ablation(args.axis, values, reports)
    (out_dir / "ablation.txt").write_text(table, encoding="utf-8")
    sys.stdout.write(table)
    return 0


def _cmd_repeats(args) -> int:
    config = _config_from_args(args)
    seeds = _parse_seeds(args.seeds)
    summary = run_repeats(args.manifest, config, seeds)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    reports = summary.pop("reports")
    for seed, report in zip(seeds, reports):
        write_report_files(report, out_dir / f"seed-{seed}")
    summary["reports"] = [r.to_dict() for r in reports]
    (out_dir / "repeats.json").write_text(
        json.dumps(summary, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    text = format_repeats(summary)
    (out_dir / "repeats.txt").write_text(text, encoding="utf-8")
    sys.stdout.write(text)
    return 0


def _cmd_make_fixture(args) -> int:
    out = Path(args.out)
    if args.kind == "exact":
        path = make_exact_fixture(out, seed=args.seed if args.seed is not None else 0)
    elif args.kind == "benchmark":
        path = make_benchmark_fixture(out, seed=args.seed if args.seed is not None else 0)
    else:
        paths = make_mini_fixture(out, **({"seed": args.seed} if args.seed is not None else {}))
        path = paths["manifest"]
    sys.stdout.write(f"{path}\n")
    return 0


_COMMANDS = {
    "classify": _cmd_classify,
    "ablate": _cmd_ablate,
    "repeats": _cmd_repeats,
    "make-fixture": _cmd_make_fixture,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        sys.stderr.write(f"config error: {exc}\n")
        return 2
    except DataError as exc:
        sys.stderr.write(f"data error: {exc}\n")
        return 3


if __name__ == "__main__":
    sys.exit(main())
