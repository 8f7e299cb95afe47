"""Command-line front end.

Exit codes: 0 success, 1 validation failure (bad flags, config, or input
content), 2 I/O failure (unreadable input, unwritable output).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from types import SimpleNamespace

from selective_eval import __version__
from selective_eval.config import ConfigError, RunConfig, load_config
from selective_eval.curve import auc
from selective_eval.diagnostics import first_drop, tolerance_cutoff
from selective_eval.ingest import IngestError, read_logs, write_log
from selective_eval.report import (
    ReportError,
    analysis_curve,
    assemble_report,
    emit_plots,
    evaluate_log,
    rank_models,
    write_curves,
    write_report,
)
from selective_eval.scores import ScoreError
from selective_eval.synth import (
    CASE_DESCRIPTIONS,
    Calibrated,
    Fluctuating,
    Plateau,
    Staircase,
    SynthError,
    SynthSpec,
    check_table1_pair,
    generate,
    generate_table1_pair,
)

EXIT_OK, EXIT_INVALID, EXIT_IO = 0, 1, 2
VALIDATION_ERRORS = (ConfigError, IngestError, ReportError, ScoreError, SynthError, ValueError)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # bad flags are a validation failure (exit 1), not argparse's default exit 2
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _float_list(text: str) -> tuple:
    try:
        return tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _add_global(p: argparse.ArgumentParser, suppress: bool) -> None:
    # Global flags are accepted before or after the command name; the
    # subcommand copies use SUPPRESS so they never clobber a value given earlier.
    kw = {"default": argparse.SUPPRESS} if suppress else {}
    g = p.add_argument_group("global options")
    g.add_argument("--config", type=Path, help="JSON run configuration", **kw)
    g.add_argument("--out", type=Path, help="output directory", **kw)
    g.add_argument("--format", choices=("csv", "jsonl"),
                   help="log format (default: from file extension; csv for synth output)", **kw)


def _common_parent() -> argparse.ArgumentParser:
    p = _Parser(add_help=False)
    _add_global(p, suppress=True)
    return p


def _score_parent() -> argparse.ArgumentParser:
    p = _Parser(add_help=False)
    g = p.add_argument_group("score parameters (override the config file)")
    for w in "xyz":
        g.add_argument(f"--{w}", type=float, help=f"DiSCA weight {w}")
    for w in "pquv":
        g.add_argument(f"--{w}", type=float, help=f"DiDMA/NiDMA weight {w}")
    g.add_argument("--thresholds", type=_float_list,
                   help="worst admissible accuracies to sweep, strictly decreasing")
    g.add_argument("--score-threshold", type=float,
                   help="worst admissible accuracy used for DiDMA, NiDMA and ranking")
    g.add_argument("--band-width", type=float, help="plateau accuracy band")
    g.add_argument("--min-span", type=float, help="minimum plateau coverage span")
    g.add_argument("--low-maxprob-ceiling", type=float,
                   help="plateau is acceptable only below this maxprob")
    g.add_argument("--tail-limit", type=float, help="coverage limit for tail comparison")
    g.add_argument("--bins", type=int, help="resample curves onto this many coverage bins")
    g.add_argument("--rank-key", help="auc | disca | disca@<t> | didma | nidma")
    return p


def build_parser() -> argparse.ArgumentParser:
    common, scoring = _common_parent(), _score_parent()
    parser = _Parser(prog="selective-eval", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    _add_global(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("score", parents=[common, scoring],
                       help="score every log: report.json, table.csv, curves, plots")
    p.add_argument("logs", nargs="+", type=Path)

    p = sub.add_parser("nidma", parents=[common, scoring],
                       help="pair IID and OOD logs by model and add DiDMA/NiDMA")
    p.add_argument("iid", type=Path)
    p.add_argument("ood", type=Path)

    p = sub.add_parser("diagnose", parents=[common, scoring],
                       help="write a/b extraction, fluctuations and plateau findings")
    p.add_argument("logs", nargs="+", type=Path)

    p = sub.add_parser("rank", parents=[common, scoring], help="print models ranked by a key")
    p.add_argument("logs", nargs="+", type=Path)

    p = sub.add_parser("curve", parents=[common, scoring],
                       help="export coverage-accuracy curves and print AUC")
    p.add_argument("logs", nargs="+", type=Path)

    p = sub.add_parser("synth", parents=[common], help="generate synthetic prediction logs")
    p.add_argument("--table1-case", type=int, help="Table 1 adversarial pair, case 1..6")
    p.add_argument("--shape", choices=("calibrated", "plateau", "fluctuating", "staircase"))
    p.add_argument("--n", type=int, default=200, help="samples per log")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--acc", type=float, default=0.9, help="calibrated: final accuracy")
    p.add_argument("--level", type=float, default=0.93, help="plateau: accuracy level")
    p.add_argument("--floor", type=float, default=0.8, help="plateau: lowest maxprob")
    p.add_argument("--events", type=int, default=2, help="fluctuating: number of events")
    p.add_argument("--magnitude", type=float, default=0.5,
                   help="fluctuating: share of each segment answered correctly")
    p.add_argument("--targets", type=_float_list, help="staircase: 10 decile accuracies")
    p.add_argument("--model", default="synth", help="model id for --shape logs")
    p.add_argument("--dataset", default="synthetic", help="dataset id for --shape logs")
    return parser


def _config(args) -> RunConfig:
    config = load_config(args.config) if args.config else RunConfig()
    return config.with_overrides(
        x=args.x, y=args.y, z=args.z, p=args.p, q=args.q, u=args.u, v=args.v,
        thresholds=args.thresholds, score_threshold=args.score_threshold,
        band_width=args.band_width, min_span=args.min_span,
        low_maxprob_ceiling=args.low_maxprob_ceiling, tail_coverage_limit=args.tail_limit,
        resample_bins=args.bins, rank_key=args.rank_key,
    )


def _load(paths, fmt) -> list:
    logs = []
    for path in paths:
        logs.extend(read_logs(path, fmt))
    return logs


def _need_out(args, default=None) -> Path:
    if args.out is None:
        if default is None:
            raise UsageError(f"{args.command}: --out is required")
        return default
    return args.out


def cmd_score(args) -> int:
    config = _config(args)
    report = assemble_report(_load(args.logs, args.format), config)
    write_report(report, _need_out(args))
    return EXIT_OK


def cmd_nidma(args) -> int:
    config = _config(args)
    iid = read_logs(args.iid, args.format)
    ood = read_logs(args.ood, args.format)
    report = assemble_report(iid, config, ood_logs=ood)
    write_report(report, _need_out(args))
    for m in report.models:
        if m.nidma is not None:
            print(f"{m.model_id}\tdisca_iid={m.score.total:.6g}\tdisca_ood={m.ood_disca:.6g}"
                  f"\tdidma={m.didma:.6g}\tnidma={m.nidma:.6g}")
    return EXIT_OK


def cmd_diagnose(args) -> int:
    config = _config(args)
    out = _need_out(args)
    report = assemble_report(_load(args.logs, args.format), config)
    findings = []
    for m in report.models:
        cutoffs = [
            {"worst_accuracy": t, **tolerance_cutoff(m.curve, t)._asdict()}
            for t in config.thresholds
        ]
        d = m.to_dict()["diagnostics"]
        findings.append({
            "model_id": m.model_id,
            "dataset_id": m.dataset_id,
            "auc": m.auc,
            "first_drop": first_drop(m.curve)._asdict(),
            "tolerance_cutoffs": cutoffs,
            "fluctuations": d["fluctuations"],
            "plateau": d["plateau"],
            "tail": d["tail"],
        })
    out.mkdir(parents=True, exist_ok=True)
    payload = {"config_echo": config.to_dict(), "findings": findings}
    (out / "findings.json").write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
    emit_plots(report, ["rc_curve"], out)
    return EXIT_OK


def cmd_rank(args) -> int:
    config = _config(args)
    results = [evaluate_log(log, config) for log in _load(args.logs, args.format)]
    datasets = sorted({r.dataset_id for r in results})
    rows = []
    for ds in datasets:
        group = rank_models([r for r in results if r.dataset_id == ds], config.rank_key)
        for i, r in enumerate(group, start=1):
            rows.append({"dataset_id": ds, "rank": i, "model_id": r.model_id, "auc": r.auc,
                         "disca": r.score.total})
            print(f"{ds}\t{i}\t{r.model_id}\tauc={r.auc:.6f}\tdisca={r.score.total:.6f}")
    if args.out is not None:
        args.out.mkdir(parents=True, exist_ok=True)
        payload = {"rank_key": config.rank_key, "ranking": rows}
        (args.out / "ranking.json").write_text(json.dumps(payload, indent=2) + "\n",
                                               encoding="utf-8")
    return EXIT_OK


def cmd_curve(args) -> int:
    config = _config(args)
    out = _need_out(args)
    holders = []
    for log in _load(args.logs, args.format):
        curve = analysis_curve(log, config)
        holders.append(SimpleNamespace(curve=curve, model_id=log.model_id, dataset_id=log.dataset_id))
        print(f"{log.model_id}\t{log.dataset_id}\tpoints={len(curve.points)}\tauc={auc(curve):.12g}")
    write_curves(holders, out)
    return EXIT_OK


def _shape(args):
    if args.shape == "calibrated":
        return Calibrated(args.acc)
    if args.shape == "plateau":
        return Plateau(args.level, args.floor)
    if args.shape == "fluctuating":
        return Fluctuating(args.events, args.magnitude)
    if args.targets is None or len(args.targets) != 10:
        raise UsageError("synth --shape staircase needs --targets with 10 values")
    return Staircase(args.targets)


def cmd_synth(args) -> int:
    if (args.table1_case is None) == (args.shape is None):
        raise UsageError("synth: give exactly one of --table1-case or --shape")
    out = _need_out(args, default=Path("."))
    fmt = args.format or "csv"
    suffix = "jsonl" if fmt == "jsonl" else "csv"
    if args.table1_case is not None:
        if args.table1_case not in CASE_DESCRIPTIONS:
            raise SynthError(f"--table1-case must be 1..6, got {args.table1_case}")
        log_a, log_b = generate_table1_pair(args.table1_case, args.n, args.seed)
        check = check_table1_pair(args.table1_case, log_a, log_b)
        out.mkdir(parents=True, exist_ok=True)
        for tag, log in (("A", log_a), ("B", log_b)):
            (out / f"table1_case{args.table1_case}_{tag}.{suffix}").write_bytes(write_log([log], fmt))
        print(check.summary())
        return EXIT_OK
    spec = SynthSpec(args.n, _shape(args), args.seed, args.model, args.dataset)
    log = generate(spec)
    out.mkdir(parents=True, exist_ok=True)
    (out / f"synth_{args.shape}.{suffix}").write_bytes(write_log([log], fmt))
    return EXIT_OK


COMMANDS = {
    "score": cmd_score,
    "nidma": cmd_nidma,
    "diagnose": cmd_diagnose,
    "rank": cmd_rank,
    "curve": cmd_curve,
    "synth": cmd_synth,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except VALIDATION_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
