"""Command line interface.

Subcommands: ``simulate`` (write a synthetic corpus), ``train`` (fit and
tune a mode registry), ``analyze`` (distinguishability tables), ``classify``
(open-set evaluation) and ``estimate`` (fault size tables).  Exit codes:
0 success, 1 usage or configuration error, 2 data error.  A ``--config``
JSON file overrides the command line flags.  All outputs are deterministic
for a fixed seed, so rerunning a pipeline reproduces its reports byte for
byte.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import sys
from dataclasses import dataclass
from pathlib import Path

from .analysis import (
    batch_size_sweep_rows,
    build_modes_all_data,
    distinguishability_rows,
    rejection_matrix_rows,
    size_table_rows,
)
from .dataset import (
    SyntheticBenchConfig,
    corpus_pdfs,
    generate_bench,
    load_csv,
    split,
    write_csv,
)
from .errors import ConfigError, DataError
from .serialize import save_registry
from .thresholds import tune


@dataclass
class RunConfig:
    """Everything a subcommand run depends on."""

    seed: int = 0
    batch_size: int = 100
    trim: float = 0.0
    alpha: float = 0.05
    neighbors: int = 10
    mc_samples: int = 1000
    mc_runs: int = 10
    train_fraction: float = 0.67
    hold_out: str | None = None
    use_split: bool = False
    sweep: tuple[int, ...] = ()
    bench: dict | None = None

    def validate(self) -> None:
        if self.batch_size < 3:
            raise ConfigError("--batch-size must be at least 3")
        if not 0.0 <= self.trim < 0.5:
            raise ConfigError("--trim must lie in [0, 0.5)")
        if not 0.0 < self.alpha <= 0.5:
            raise ConfigError("--alpha must lie in (0, 0.5]")
        if self.neighbors < 1:
            raise ConfigError("--neighbors must be at least 1")
        if self.mc_samples < 100:
            raise ConfigError("--mc-samples must be at least 100")
        if self.mc_runs < 1:
            raise ConfigError("--mc-runs must be at least 1")
        if not 0.0 < self.train_fraction <= 1.0:
            raise ConfigError("--train-fraction must lie in (0, 1]")


def _load_config_file(path: Path) -> dict:
    try:
        doc = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file is not valid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise ConfigError("config file must hold a JSON object")
    return doc


def _run_config(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig(
        seed=args.seed,
        batch_size=args.batch_size,
        trim=args.trim,
        alpha=args.alpha,
        neighbors=args.neighbors,
        mc_samples=args.mc_samples,
        mc_runs=getattr(args, "mc_runs", 10),
        train_fraction=args.train_fraction,
        hold_out=getattr(args, "hold_out", None),
        use_split=getattr(args, "use_split", False),
        sweep=tuple(getattr(args, "sweep", ()) or ()),
    )
    if args.config is not None:
        overrides = _load_config_file(args.config)
        known = {f.name for f in dataclasses.fields(RunConfig)}
        unknown = set(overrides) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        for key, value in overrides.items():
            if key == "sweep":
                value = tuple(int(v) for v in value)
            setattr(cfg, key, value)
    cfg.validate()
    return cfg


def _format_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _write_rows_csv(path: Path, rows: list[dict]) -> None:
    if not rows:
        path.write_text("")
        return
    fieldnames = list(rows[0].keys())
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(fieldnames)
        for row in rows:
            writer.writerow([_format_cell(row.get(name)) for name in fieldnames])


def _write_rows_json(path: Path, rows) -> None:
    with open(path, "w") as fh:
        json.dump(rows, fh, indent=2)
        fh.write("\n")


def _gnuplot_script(csv_name: str, classes: list[str]) -> str:
    lines = [
        "# gnuplot script: median distinguishability from the fault-free mode",
        "set datafile separator ','",
        "set xlabel 'magnitude'",
        "set ylabel 'median D'",
        "set key outside",
        "plot \\",
    ]
    plots = []
    for label in classes:
        cond = f"(strcol(1) eq '{label}' && strcol(3) eq 'NF')"
        plots.append(
            f"  '{csv_name}' using 2:({cond} ? column(7) : 1/0) "
            f"with points title '{label}'"
        )
    lines.append(", \\\n".join(plots))
    return "\n".join(lines) + "\n"


def _load_scenarios(path: Path):
    if not Path(path).exists():
        raise DataError(f"{path}: no such file")
    return load_csv(path)


def cmd_simulate(args: argparse.Namespace) -> int:
    cfg = _run_config(args)
    bench_doc = dict(cfg.bench or {})
    bench_doc.setdefault("seed", cfg.seed)
    try:
        bench = SyntheticBenchConfig.from_dict(bench_doc)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid bench configuration: {exc}") from None
    out = Path(args.out)
    if out.exists() and not args.force:
        raise ConfigError(f"{out} already exists; pass --force to overwrite")
    scenarios = generate_bench(bench)
    write_csv(out, scenarios)
    print(f"wrote {len(scenarios)} scenarios to {out}")
    return 0


def cmd_train(args: argparse.Namespace) -> int:
    cfg = _run_config(args)
    scenarios = _load_scenarios(args.data)
    by_class = corpus_pdfs(scenarios, cfg.batch_size, cfg.trim)
    try:
        registry, _ = split(by_class, cfg.train_fraction, cfg.seed)
        models = {label: tune(mode, cfg.alpha) for label, mode in registry.modes.items()}
    except ValueError as exc:
        raise DataError(str(exc)) from None
    save_registry(args.out, registry, models)
    for label in registry.modes:
        mode = registry.modes[label]
        print(f"{label}: {len(mode)} members, threshold {models[label].threshold:.6g}")
    print(f"wrote registry to {args.out}")
    return 0


def cmd_analyze(args: argparse.Namespace) -> int:
    cfg = _run_config(args)
    scenarios = _load_scenarios(args.data)
    by_class = corpus_pdfs(scenarios, cfg.batch_size, cfg.trim)
    try:
        if cfg.use_split:
            registry, eval_pdfs = split(by_class, cfg.train_fraction, cfg.seed)
        else:
            registry = build_modes_all_data(by_class)
            eval_pdfs = by_class
        rows = distinguishability_rows(registry, eval_pdfs)
    except ValueError as exc:
        raise DataError(str(exc)) from None
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    _write_rows_csv(out_dir / "distinguishability.csv", rows)
    _write_rows_json(out_dir / "distinguishability.json", rows)
    written = ["distinguishability.csv", "distinguishability.json"]
    if cfg.sweep:
        sweep_rows = batch_size_sweep_rows(scenarios, cfg.sweep, cfg.trim)
        _write_rows_csv(out_dir / "batch_size_sweep.csv", sweep_rows)
        _write_rows_json(out_dir / "batch_size_sweep.json", sweep_rows)
        written += ["batch_size_sweep.csv", "batch_size_sweep.json"]
    if args.gnuplot_script:
        classes = sorted(l for l in by_class if l != registry.nf_label)
        script = _gnuplot_script("distinguishability.csv", classes)
        (out_dir / args.gnuplot_script).write_text(script)
        written.append(args.gnuplot_script)
    print(f"wrote {', '.join(written)} to {out_dir}")
    return 0


def cmd_classify(args: argparse.Namespace) -> int:
    cfg = _run_config(args)
    scenarios = _load_scenarios(args.data)
    try:
        rows, diagnoses = rejection_matrix_rows(
            scenarios,
            batch_size=cfg.batch_size,
            trim_fraction=cfg.trim,
            alpha=cfg.alpha,
            train_fraction=cfg.train_fraction,
            seed=cfg.seed,
            mc_runs=cfg.mc_runs,
            hold_out=cfg.hold_out,
        )
    except ValueError as exc:
        raise DataError(str(exc)) from None
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    _write_rows_csv(out_dir / "rejection_matrix.csv", rows)
    _write_rows_json(out_dir / "rejection_matrix.json", rows)
    with open(out_dir / "diagnoses.jsonl", "w") as fh:
        for diagnosis in diagnoses:
            fh.write(diagnosis.to_json_line() + "\n")
    print(
        f"wrote rejection_matrix.csv, rejection_matrix.json, diagnoses.jsonl to {out_dir}"
    )
    return 0


def cmd_estimate(args: argparse.Namespace) -> int:
    cfg = _run_config(args)
    scenarios = _load_scenarios(args.data)
    try:
        rows = size_table_rows(
            scenarios,
            batch_size=cfg.batch_size,
            trim_fraction=cfg.trim,
            train_fraction=cfg.train_fraction,
            seed=cfg.seed,
            neighbors=cfg.neighbors,
            mc_samples=cfg.mc_samples,
        )
    except ValueError as exc:
        raise DataError(str(exc)) from None
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    _write_rows_csv(out_dir / "size_estimates.csv", rows)
    _write_rows_json(out_dir / "size_estimates.json", rows)
    print(f"wrote size_estimates.csv, size_estimates.json to {out_dir}")
    return 0


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage problems exit 1, not argparse's 2
        raise ConfigError(message)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="base random seed")
    common.add_argument("--batch-size", type=int, default=100, dest="batch_size")
    common.add_argument("--trim", type=float, default=0.0, help="covariance trim fraction")
    common.add_argument("--alpha", type=float, default=0.05, help="threshold false-alarm rate")
    common.add_argument("--neighbors", type=int, default=10, help="nearest pdfs for size estimation")
    common.add_argument("--mc-samples", type=int, default=1000, dest="mc_samples")
    common.add_argument("--train-fraction", type=float, default=0.67, dest="train_fraction")
    common.add_argument("--config", type=Path, default=None, help="JSON file; overrides flags")
    common.add_argument("--json-errors", action="store_true", dest="json_errors")

    parser = _Parser(prog="kldiag", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", parents=[common], help="write a synthetic corpus")
    p.add_argument("--out", type=Path, required=True, help="output CSV path")
    p.add_argument("--force", action="store_true", help="overwrite an existing file")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("train", parents=[common], help="fit and tune a mode registry")
    p.add_argument("data", type=Path, help="corpus CSV")
    p.add_argument("--out", type=Path, default=Path("registry.json"))
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("analyze", parents=[common], help="distinguishability analysis")
    p.add_argument("data", type=Path, help="corpus CSV")
    p.add_argument("--out-dir", type=Path, default=Path("."), dest="out_dir")
    p.add_argument("--use-split", action="store_true", dest="use_split",
                   help="evaluate validation pdfs against trained modes instead of all data")
    p.add_argument("--sweep", type=lambda s: tuple(int(v) for v in s.split(",")), default=(),
                   help="comma-separated batch sizes for the sweep table")
    p.add_argument("--gnuplot-script", default=None, dest="gnuplot_script",
                   help="also emit a gnuplot script with this filename")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("classify", parents=[common], help="open-set classification evaluation")
    p.add_argument("data", type=Path, help="corpus CSV")
    p.add_argument("--out-dir", type=Path, default=Path("."), dest="out_dir")
    p.add_argument("--mc-runs", type=int, default=10, dest="mc_runs")
    p.add_argument("--hold-out", default=None, dest="hold_out",
                   help="exclude this class from training (unknown-fault evaluation)")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("estimate", parents=[common], help="fault size estimation tables")
    p.add_argument("data", type=Path, help="corpus CSV")
    p.add_argument("--out-dir", type=Path, default=Path("."), dest="out_dir")
    p.set_defaults(func=cmd_estimate)
    return parser


def _emit_error(kind: str, message: str, as_json: bool) -> None:
    if as_json:
        print(json.dumps({"error": {"type": kind, "message": message}}), file=sys.stderr)
    else:
        print(f"kldiag: {kind} error: {message}", file=sys.stderr)


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    as_json = "--json-errors" in argv
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except ConfigError as exc:
        _emit_error("config", str(exc), as_json)
        return 1
    except DataError as exc:
        _emit_error("data", str(exc), as_json)
        return 2


def console_main() -> None:
    raise SystemExit(main())
