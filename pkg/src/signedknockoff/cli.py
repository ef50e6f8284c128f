"""Command-line interface.

Subcommands: ``analyze`` (one table, one level, optional alpha sweep),
``simulate`` (Monte Carlo studies from a design config), ``compare``
(several procedures on one table) and ``selftest`` (engine vs brute-force
transcription). Exit codes: 0 success, 1 failure with a diagnostic on
stderr, 2 usage errors. CSV/JSON files are the canonical outputs; figures
are rendered next to them unless --no-figures is given.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import math
import sys
from pathlib import Path

import numpy as np

from .analysis import AnalysisReport, analyze, table_signed_p, write_curve_csv, write_report
from .candidates import ReplicateData, parse_candidates
from .config import load_design_config
from .reference import equivalence_suite
from .simulate import NormalDesign, design_to_dict, run_study
from .strategies import alternate_strategy, available_strategies, lfdr_strategy, nearest_strategy
from .tables import MODE_STATISTICS, TableParseError, read_stat_table

__all__ = ["main", "build_parser"]

_DELIMITERS = {"auto": None, "comma": ",", "tab": "\t"}


def _parse_refit_interval(text: str):
    if text == "once":
        return math.inf
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer or 'once', got {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError("refit interval must be >= 1")
    return value


def _parse_alpha(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}") from None
    if not (0.0 < value < 1.0):
        raise argparse.ArgumentTypeError(f"alpha must lie in (0, 1), got {value}")
    return value


def _parse_sweep(text: str) -> list[float]:
    """Either 'start:stop:count' or a comma-separated list of levels."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise argparse.ArgumentTypeError("sweep range must be start:stop:count")
        try:
            start, stop = float(parts[0]), float(parts[1])
            count = int(parts[2])
        except ValueError:
            raise argparse.ArgumentTypeError(f"bad sweep range {text!r}") from None
        if count < 2:
            raise argparse.ArgumentTypeError("sweep needs at least 2 points")
        levels = np.linspace(start, stop, count).tolist()
    else:
        try:
            levels = [float(p) for p in text.split(",") if p.strip()]
        except ValueError:
            raise argparse.ArgumentTypeError(f"bad sweep list {text!r}") from None
    if not levels or any(not (0.0 < lv < 1.0) for lv in levels):
        raise argparse.ArgumentTypeError("sweep levels must lie in (0, 1)")
    return levels


def _strategy_options(args) -> dict:
    options = {}
    if args.strategy == "lfdr" and args.refit_interval is not None:
        options["refit_interval"] = args.refit_interval
    return options


def _ensure_outdir(out: str) -> Path:
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="signedknockoff",
        description="FDR control with directional information via signed-p knockoff pairs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    common_strategy = argparse.ArgumentParser(add_help=False)
    common_strategy.add_argument("--strategy", choices=available_strategies(), default="lfdr",
                                 help="side-selection strategy (default: lfdr)")
    common_strategy.add_argument("--refit-interval", type=_parse_refit_interval, default=None,
                                 metavar="N|once",
                                 help="accepted pairs between lfdr refits (default: n/50; 'once' fits once)")

    p_analyze = sub.add_parser("analyze", parents=[common_strategy],
                               help="run the procedure on a delimited table")
    p_analyze.add_argument("--input", required=True, help="input table (see README for the schema)")
    p_analyze.add_argument("--alpha", type=_parse_alpha, required=True, help="target FDR level")
    p_analyze.add_argument("--sweep", type=_parse_sweep, default=None, metavar="SPEC",
                           help="alpha sweep: 'start:stop:count' or 'a1,a2,...'")
    p_analyze.add_argument("--delimiter", choices=sorted(_DELIMITERS), default="auto")
    p_analyze.add_argument("--seed", type=int, default=None, help="echoed in outputs")
    p_analyze.add_argument("--out", default=None, help="output directory (default: print JSON)")
    p_analyze.add_argument("--no-figures", action="store_true", help="skip PNG rendering")
    p_analyze.set_defaults(func=_cmd_analyze)

    p_sim = sub.add_parser("simulate", parents=[common_strategy],
                           help="run a Monte Carlo study from a design config")
    p_sim.add_argument("--design-config", required=True, help="INI design file (see README)")
    p_sim.add_argument("--procedures", default="sk,bh", help="comma list from: sk, bh, orc")
    p_sim.add_argument("--reps", type=int, default=None, help="override config replicate count")
    p_sim.add_argument("--seed", type=int, default=None, help="override config seed")
    p_sim.add_argument("--paper-scale", action="store_true",
                       help="full-scale run (n=5000, reps=200) instead of desk scale")
    p_sim.add_argument("--parallelism", type=int, default=1, help="worker processes")
    p_sim.add_argument("--out", default=None, help="output directory (default: print summary)")
    p_sim.add_argument("--no-figures", action="store_true")
    p_sim.set_defaults(func=_cmd_simulate)

    p_cmp = sub.add_parser("compare", parents=[common_strategy],
                           help="run several procedures on one table")
    p_cmp.add_argument("--input", required=True)
    p_cmp.add_argument("--alpha", type=_parse_alpha, required=True)
    p_cmp.add_argument("--procedures", default="sk,bh", help="comma list from: sk, bh")
    p_cmp.add_argument("--delimiter", choices=sorted(_DELIMITERS), default="auto")
    p_cmp.add_argument("--seed", type=int, default=None, help="echoed in outputs")
    p_cmp.add_argument("--out", default=None)
    p_cmp.add_argument("--no-figures", action="store_true")
    p_cmp.set_defaults(func=_cmd_compare)

    p_self = sub.add_parser("selftest", help="check the engine against the naive transcription")
    p_self.add_argument("--instances", type=int, default=200, help="random instances (default 200)")
    p_self.add_argument("--seed", type=int, default=0)
    p_self.add_argument("--max-n", type=int, default=12, help="largest instance size")
    p_self.add_argument("--strategies", default="alternate,nearest,lfdr",
                        help="comma list of strategies to exercise")
    p_self.set_defaults(func=_cmd_selftest)

    return parser


def _write_rejections_csv(report: AnalysisReport, q_by_id: dict, path: Path):
    with path.open("w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["id", "side", "signed_p"])
        for row in report.rejected:
            writer.writerow([row["id"], row["side"], repr(q_by_id[row["id"]])])


def _cmd_analyze(args) -> int:
    table = read_stat_table(args.input, delimiter=_DELIMITERS[args.delimiter])
    report = analyze(
        table,
        alpha=args.alpha,
        strategy=args.strategy,
        strategy_options=_strategy_options(args),
        sweep_alphas=args.sweep,
        seed=args.seed,
    )
    print(f"n={report.n} (pos {report.n_plus} / neg {report.n_minus}), alpha={report.alpha:g}, "
          f"strategy={args.strategy}")
    print(f"rejected {report.n_rejected} (neg {report.n_neg_rejected}, pos {report.n_pos_rejected}); "
          f"region [-1, {report.region['neg_boundary']:.6g}) u ({report.region['pos_boundary']:.6g}, 1]")
    for note in report.warnings:
        print(f"note: {note}")

    if args.out is None:
        print(report.to_json(), end="")
        return 0

    outdir = _ensure_outdir(args.out)
    written = []
    write_report(report, outdir / "report.json")
    written.append(outdir / "report.json")
    _, q = table_signed_p(table)
    q_by_id = dict(zip(table.ids, q.tolist()))
    _write_rejections_csv(report, q_by_id, outdir / "rejections.csv")
    written.append(outdir / "rejections.csv")
    if report.sweep is not None:
        write_curve_csv(report.sweep, outdir / "curves.csv")
        written.append(outdir / "curves.csv")
    if not args.no_figures:
        from . import figures  # deferred: matplotlib only loads when rendering

        written.append(figures.save_signedp_histogram(q, report.region, outdir / "signedp_hist.png"))
        written.append(figures.save_fdr_trace(report.fdr_hat_trace, report.alpha,
                                              outdir / "fdr_trace.png"))
        if report.sweep is not None:
            written.append(figures.save_sweep_curves(report.sweep, outdir / "sweep.png"))
    for path in written:
        print(f"wrote {path}")
    return 0


def _json_safe(value):
    """Recursively map NaN/inf to None so outputs stay strict JSON."""
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, dict):
        return {k: _json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_safe(v) for v in value]
    return value


def _cmd_simulate(args) -> int:
    config = load_design_config(args.design_config)
    overrides = {}
    if args.paper_scale:
        overrides.update(n=5000, reps=200)
    if args.reps is not None:
        overrides["reps"] = args.reps
    if args.seed is not None:
        overrides["seed"] = args.seed
    if overrides:
        config = dataclasses.replace(config, base=dataclasses.replace(config.base, **overrides))

    candidates = parse_candidates(args.procedures, strategy=args.strategy,
                                  strategy_options=_strategy_options(args))
    designs = config.designs()

    grid_rows = []
    studies_json = []
    for design in designs:
        study = run_study(design, candidates, parallelism=args.parallelism)
        procs_json = {}
        for name, proc in study.procedures.items():
            procs_json[name] = _json_safe(
                {
                    "fdp": proc.fdp.tolist(),
                    "power": proc.power.tolist(),
                    "errors": [list(e) for e in proc.errors],
                    "mean_fdp": proc.mean_fdp,
                    "mcse_fdp": proc.mcse_fdp,
                    "mean_power": proc.mean_power,
                    "mcse_power": proc.mcse_power,
                }
            )
        studies_json.append({"design": design_to_dict(design), "procedures": procs_json})
        for row in study.summary_rows():
            if config.vary is not None:
                row[config.vary] = getattr(design, config.vary)
            row["seed"] = design.seed
            grid_rows.append(row)

    header = ["procedure", "mean_fdp", "mcse_fdp", "mean_power", "mcse_power", "errors", "seed"]
    if config.vary is not None:
        header.insert(0, config.vary)
    print("  ".join(header))
    for row in grid_rows:
        print("  ".join(_format_cell(row.get(key)) for key in header))

    if args.out is None:
        return 0

    outdir = _ensure_outdir(args.out)
    written = []
    csv_path = outdir / "study.csv"
    with csv_path.open("w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(header)
        for row in grid_rows:
            writer.writerow([row.get(key) for key in header])
    written.append(csv_path)

    json_path = outdir / "study.json"
    payload = {"seed": designs[0].seed, "vary": config.vary, "studies": studies_json}
    json_path.write_text(json.dumps(_json_safe(payload), indent=2, sort_keys=True) + "\n")
    written.append(json_path)

    if not args.no_figures:
        from . import figures

        alpha = designs[0].alpha
        if config.vary is None:
            written.append(figures.save_study_summary(grid_rows, alpha, outdir / "study.png"))
        else:
            written.append(figures.save_study_curves(grid_rows, config.vary, alpha,
                                                     outdir / "study.png"))
    for path in written:
        print(f"wrote {path}")
    return 0


def _format_cell(value) -> str:
    if isinstance(value, float):
        return "nan" if math.isnan(value) else f"{value:.4f}"
    return str(value)


def _cmd_compare(args) -> int:
    table = read_stat_table(args.input, delimiter=_DELIMITERS[args.delimiter])
    candidates = parse_candidates(args.procedures, strategy=args.strategy,
                                  strategy_options=_strategy_options(args))
    p, q = table_signed_p(table)
    common = table.common_df()
    data = ReplicateData(
        statistics=table.statistics if table.mode == MODE_STATISTICS else q,
        df=None if common is None or math.isnan(common) else common,
        p_values=p,
        signed_p=q,
        labels=None,
        truth=None,
        z_values=table.statistics if table.mode == MODE_STATISTICS and common is not None and math.isnan(common) else None,
    )

    rows = []
    detail = {}
    for cand in candidates:
        rejected = np.asarray(cand(data, args.alpha), dtype=np.intp)
        n_neg = int(np.count_nonzero(q[rejected] < 0))
        rows.append(
            {
                "procedure": cand.name,
                "n_rejected": int(rejected.size),
                "n_neg": n_neg,
                "n_pos": int(rejected.size) - n_neg,
                "seed": args.seed,
            }
        )
        detail[cand.name] = sorted(table.ids[idx] for idx in rejected.tolist())
        print(f"{cand.name}: rejected {rejected.size} (neg {n_neg}, pos {rejected.size - n_neg})")

    if args.out is None:
        return 0

    outdir = _ensure_outdir(args.out)
    written = []
    csv_path = outdir / "compare.csv"
    with csv_path.open("w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["procedure", "n_rejected", "n_neg", "n_pos", "seed"])
        for row in rows:
            writer.writerow([row["procedure"], row["n_rejected"], row["n_neg"], row["n_pos"], row["seed"]])
    written.append(csv_path)

    json_path = outdir / "compare.json"
    payload = {"alpha": args.alpha, "seed": args.seed, "rejected_ids": detail, "summary": rows}
    json_path.write_text(json.dumps(_json_safe(payload), indent=2, sort_keys=True) + "\n")
    written.append(json_path)

    if not args.no_figures:
        from . import figures

        written.append(figures.save_signedp_histogram(q, None, outdir / "signedp_hist.png"))
    for path in written:
        print(f"wrote {path}")
    return 0


def _cmd_selftest(args) -> int:
    factories = {}
    for name in (part.strip() for part in args.strategies.split(",") if part.strip()):
        if name == "alternate":
            factories[name] = alternate_strategy
        elif name == "nearest":
            factories[name] = nearest_strategy
        elif name == "lfdr":
            factories[name] = lfdr_strategy
        else:
            raise ValueError(f"unknown strategy {name!r} in --strategies")
    if not factories:
        raise ValueError("no strategies selected")
    checks, mismatches = equivalence_suite(args.instances, args.seed, factories, max_n=args.max_n)
    print(f"checked {checks} runs over {args.instances} instances (seed {args.seed}): "
          f"{len(mismatches)} mismatches")
    for text in mismatches[:5]:
        print(f"MISMATCH {text}")
    return 1 if mismatches else 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (TableParseError, ValueError, ArithmeticError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
