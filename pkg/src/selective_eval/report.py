"""Multi-model score reports: ranking, tables, curve exports and SVG plots.

Output layout under an output directory::

    report.json
    table.csv
    curves/<model>_<dataset>.csv
    plots/<kind>_<dataset>.svg
"""

from __future__ import annotations

import csv
import io
import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence

from selective_eval.config import RunConfig, parse_rank_key
from selective_eval.curve import RiskCoverageCurve, auc, build_curve, resample
from selective_eval.diagnostics import (
    FirstDrop,
    PlateauFinding,
    detect_plateau,
    find_fluctuations,
    first_drop,
    tail_compare,
)
from selective_eval.ingest import PredictionLog, validate_pair
from selective_eval.scores import (
    DiscaBreakdown,
    DiscaWeights,
    computation_score,
    didma,
    disca,
    disca_sweep,
    nidma,
)
from selective_eval.svg import PALETTE, Axes, Canvas

PLOT_KINDS = ("rc_curve", "a_bars", "b_lines", "fluctuation_bars")


class ReportError(ValueError):
    pass


@dataclass
class ModelResult:
    model_id: str
    dataset_id: str
    n_samples: int
    accuracy: float
    auc: float
    weights: DiscaWeights
    thresholds: tuple
    score: DiscaBreakdown
    sweep: list
    first_drop: FirstDrop
    fluctuations: list
    plateau: Optional[PlateauFinding]
    curve: RiskCoverageCurve = field(repr=False)
    tail: dict = field(default_factory=dict)
    computation_score: Optional[float] = None
    didma: Optional[float] = None
    nidma: Optional[float] = None
    ood_dataset_id: Optional[str] = None
    ood_disca: Optional[float] = None

    def to_dict(self) -> dict:
        return {
            "model_id": self.model_id,
            "dataset_id": self.dataset_id,
            "n_samples": self.n_samples,
            "accuracy": self.accuracy,
            "auc": self.auc,
            "disca": self.score.to_dict(),
            "breakdowns": [
                {"threshold": c.threshold, "cell_class": c.cell_class, **c.breakdown.to_dict()}
                for c in self.sweep
            ],
            "computation_score": self.computation_score,
            "didma": self.didma,
            "nidma": self.nidma,
            "ood_dataset_id": self.ood_dataset_id,
            "ood_disca": self.ood_disca,
            "diagnostics": {
                "a": self.first_drop.a,
                "a_defined": self.first_drop.defined,
                "fluctuations": [e.to_dict() for e in self.fluctuations],
                "plateau": self.plateau.to_dict() if self.plateau else None,
                "tail": [{"against": other, **f.to_dict()} for other, f in sorted(self.tail.items())],
            },
        }


@dataclass
class ScoreReport:
    models: list
    config: RunConfig

    def to_dict(self) -> dict:
        return {"config_echo": self.config.to_dict(), "models": [m.to_dict() for m in self.models]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    @property
    def datasets(self) -> list:
        return sorted({m.dataset_id for m in self.models})


def analysis_curve(log: PredictionLog, config: RunConfig) -> RiskCoverageCurve:
    curve = build_curve(log)
    return resample(curve, config.resample_bins) if config.resample_bins else curve


def evaluate_log(log: PredictionLog, config: RunConfig) -> ModelResult:
    """Curve, AUC, DiSCA sweep and single-curve diagnostics for one log."""
    curve = analysis_curve(log, config)
    pl = config.plateau
    return ModelResult(
        model_id=log.model_id,
        dataset_id=log.dataset_id,
        n_samples=len(log),
        accuracy=curve.overall_accuracy,
        auc=auc(curve),
        weights=config.disca_weights,
        thresholds=config.thresholds,
        score=disca(curve, config.disca_weights, config.score_threshold),
        sweep=disca_sweep(curve, config.disca_weights, config.thresholds),
        first_drop=first_drop(curve),
        fluctuations=find_fluctuations(curve),
        plateau=detect_plateau(curve, pl.band_width, pl.min_span, pl.low_maxprob_ceiling),
        curve=curve,
    )


def _attach_tails(results: Sequence[ModelResult], limit: float) -> None:
    for a in results:
        for b in results:
            if a is not b and a.dataset_id == b.dataset_id:
                a.tail[b.model_id] = tail_compare(a.curve, b.curve, limit)


def _attach_didma(result: ModelResult, config: RunConfig) -> None:
    comp = config.computation.get(result.model_id)
    if comp is not None:
        result.computation_score = computation_score(comp)
    if result.computation_score is not None:
        result.didma = didma(result.score.total, result.computation_score, config.composition)
    elif config.composition.q == 0:
        result.didma = didma(result.score.total, 0.0, config.composition)


def assemble_report(logs: Iterable[PredictionLog], config: RunConfig,
                    ood_logs: Optional[Iterable[PredictionLog]] = None) -> ScoreReport:
    """Score every log; with ``ood_logs``, pair them by model id and add NiDMA.

    Paired runs require a computation input for every model unless q = 0.
    """
    logs = list(logs)
    seen = set()
    for log in logs + list(ood_logs or []):
        key = (log.model_id, log.dataset_id)
        if key in seen:
            raise ReportError(f"duplicate log for model {key[0]!r} on dataset {key[1]!r}")
        seen.add(key)

    results = [evaluate_log(log, config) for log in logs]
    for r in results:
        _attach_didma(r, config)

    ood_results = []
    if ood_logs is not None:
        ood_by_model = {}
        for log in ood_logs:
            ood_by_model.setdefault(log.model_id, []).append(log)
        iid_models = {r.model_id for r in results}
        orphans = sorted(set(ood_by_model) - iid_models)
        if orphans:
            raise ReportError(f"OOD logs without an IID counterpart: {orphans}")
        for r, log in zip(results, logs):
            candidates = ood_by_model.get(r.model_id, [])
            if len(candidates) != 1:
                raise ReportError(
                    f"model {r.model_id!r} needs exactly one OOD log, found {len(candidates)}")
            ood = validate_pair(log, candidates[0]).ood
            if r.didma is None:
                raise ReportError(
                    f"model {r.model_id!r}: q > 0 needs a computation input in the config")
            o = evaluate_log(ood, config)
            r.ood_dataset_id = o.dataset_id
            r.ood_disca = o.score.total
            r.nidma = nidma(r.didma, o.score.total, config.composition)
            ood_results.append(o)

    all_results = results + ood_results
    _attach_tails(all_results, config.tail_coverage_limit)
    ordered = []
    for ds in sorted({r.dataset_id for r in all_results}):
        group = [r for r in all_results if r.dataset_id == ds]
        key = config.rank_key
        kind, _ = parse_rank_key(key)
        # OOD rows carry no DiDMA/NiDMA of their own
        if kind in ("didma", "nidma") and any(getattr(r, kind) is None for r in group):
            key = "disca"
        ordered.extend(rank_models(group, key))
    return ScoreReport(ordered, config)


def _key_value(result: ModelResult, kind: str, threshold: Optional[float]) -> float:
    if kind == "auc":
        return result.auc
    if kind in ("didma", "nidma"):
        v = getattr(result, kind)
        if v is None:
            raise ReportError(f"model {result.model_id!r} has no {kind} score")
        return v
    if threshold is None or threshold == result.score.worst_accuracy:
        return result.score.total
    for cell in result.sweep:
        if cell.threshold == threshold:
            return cell.breakdown.total
    raise ReportError(f"threshold {threshold} is not in the score sweep")


def rank_models(results: Sequence[ModelResult], key: str = "disca") -> list:
    """Order models by descending ``key``; ties go to the lexicographically smaller model id.

    ``key`` is ``auc``, ``didma``, ``nidma``, ``disca`` (the breakdown at the
    configured score threshold) or ``disca@<t>`` for a sweep column.
    """
    results = list(results)
    if not results:
        return []
    kind, threshold = parse_rank_key(key)
    datasets = {r.dataset_id for r in results}
    if len(datasets) > 1:
        raise ReportError(f"cannot rank across datasets: {sorted(datasets)}")
    configs = {(r.weights, r.thresholds, r.score.worst_accuracy) for r in results}
    if len(configs) > 1:
        raise ReportError("cannot rank models scored with different configurations")
    values = {id(r): _key_value(r, kind, threshold) for r in results}
    return sorted(results, key=lambda r: (-values[id(r)], r.model_id))


# tables ----------------------------------------------------------------------

def _num(v: float) -> str:
    return f"{v:.12g}"


def _label(result: ModelResult, multi: bool) -> str:
    return f"{result.model_id}/{result.dataset_id}" if multi else result.model_id


def _table_rows(report: ScoreReport):
    thresholds = report.config.thresholds
    header = ["model"]
    for t in thresholds:
        header += [f"disca@{t:g}", f"class@{t:g}"]
    multi = len(report.datasets) > 1
    rows = []
    for m in report.models:
        row = [_label(m, multi)]
        for cell in m.sweep:
            row += [_num(cell.breakdown.total), cell.cell_class]
        rows.append(row)
    return header, rows


def emit_table(report: ScoreReport, fmt: str = "csv") -> bytes:
    """One row per model, a (score, class) column pair per sweep threshold."""
    header, rows = _table_rows(report)
    if fmt == "csv":
        out = io.StringIO()
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
        return out.getvalue().encode("utf-8")
    if fmt == "markdown":
        lines = ["| " + " | ".join(header) + " |", "|" + "---|" * len(header)]
        lines += ["| " + " | ".join(r) + " |" for r in rows]
        return ("\n".join(lines) + "\n").encode("utf-8")
    raise ReportError(f"unknown table format {fmt!r}")


def parse_table(data: bytes, fmt: str = "csv") -> dict:
    """Inverse of emit_table: {label: {threshold: (total, cell_class)}}."""
    text = data.decode("utf-8")
    if fmt == "csv":
        rows = list(csv.reader(io.StringIO(text)))
    elif fmt == "markdown":
        lines = [ln for ln in text.splitlines() if ln.startswith("|")]
        rows = [[c.strip() for c in ln.strip().strip("|").split("|")] for ln in lines]
        rows = [rows[0]] + rows[2:]
    else:
        raise ReportError(f"unknown table format {fmt!r}")
    header, body = rows[0], rows[1:]
    thresholds = [float(h.split("@", 1)[1]) for h in header[1::2]]
    table = {}
    for row in body:
        table[row[0]] = {
            t: (float(row[1 + 2 * i]), row[2 + 2 * i]) for i, t in enumerate(thresholds)
        }
    return table


# plots -----------------------------------------------------------------------

def _safe(name: str) -> str:
    return re.sub(r"[^A-Za-z0-9._-]+", "_", name)


def _ticks(n=6):
    return [i / (n - 1) for i in range(n)]


def plot_rc_curve(models: Sequence[ModelResult], dataset: str) -> str:
    c = Canvas(640, 420)
    ax = Axes(c)
    ax.frame("coverage", "accuracy", f"Coverage-accuracy curves ({dataset})")
    ax.xticks(_ticks())
    ax.yticks(_ticks())
    for i, m in enumerate(models):
        pts = [(ax.px(p.coverage), ax.py(p.accuracy)) for p in m.curve.points]
        if len(pts) == 1:
            pts = [(ax.px(0.0), pts[0][1])] + pts
        c.polyline(pts, PALETTE[i % len(PALETTE)], label=f"{m.model_id} AUC={m.auc:.4f}")
    ax.legend([m.model_id for m in models])
    return c.render(f"rc_curve {dataset}")


def _bars(c: Canvas, ax: Axes, models, values, fmt, opacity=None):
    n = len(models)
    slot = (ax.x1 - ax.x0) / max(n, 1)
    for i, (m, v) in enumerate(zip(models, values)):
        x = ax.x0 + slot * (i + 0.2)
        top = ax.py(v)
        c.rect(x, top, slot * 0.6, ax.y0 - top, PALETTE[i % len(PALETTE)],
               opacity=opacity[i] if opacity else 1.0, label=f"{m.model_id}: {fmt.format(v)}")
        c.text(x + slot * 0.3, ax.y0 + 14, m.model_id, size=9, anchor="end", rotate=-35)


def plot_a_bars(models: Sequence[ModelResult], dataset: str) -> str:
    c = Canvas(640, 420)
    ax = Axes(c, bottom=90)
    ax.frame("", "maxprob", f"Maxprob at first error, a ({dataset})")
    ax.yticks(_ticks())
    _bars(c, ax, models, [m.first_drop.a for m in models], "{:.4f}",
          opacity=[1.0 if m.first_drop.defined else 0.4 for m in models])
    c.text(ax.x1 + 15, ax.y1 + 6, "faded: never errs", size=10)
    return c.render(f"a_bars {dataset}")


def plot_b_lines(models: Sequence[ModelResult], dataset: str) -> str:
    thresholds = list(models[0].thresholds) if models else []
    n_cols = len(thresholds) + 1
    c = Canvas(640, 420)
    ax = Axes(c, xlim=(0.0, max(n_cols - 1, 1)))
    ax.frame("worst admissible accuracy", "b (maxprob)", f"Tolerance cutoff b ({dataset})")
    ax.yticks(_ticks())
    for j, t in enumerate(thresholds):
        x = ax.px(j)
        c.line(x, ax.y0, x, ax.y0 + 5)
        c.text(x, ax.y0 + 18, f"{t:g}", size=10, anchor="middle")
    c.text(ax.px(n_cols - 1), ax.y0 + 18, "lowest", size=10, anchor="middle")
    for i, m in enumerate(models):
        color = PALETTE[i % len(PALETTE)]
        ys = [cell.breakdown.b for cell in m.sweep] + [m.curve.points[-1].threshold]
        pts = [(ax.px(j), ax.py(y)) for j, y in enumerate(ys)]
        c.polyline(pts, color, label=m.model_id)
        for x, y in pts:
            c.circle(x, y, 2.5, color)
    ax.legend([m.model_id for m in models])
    return c.render(f"b_lines {dataset}")


def plot_fluctuation_bars(models: Sequence[ModelResult], dataset: str) -> str:
    counts = [len(m.fluctuations) for m in models]
    penalties = [m.score.term3 for m in models]
    c_max = max(counts + [1])
    p_max = max(penalties + [0.0]) or 1.0
    c = Canvas(640, 420)
    ax = Axes(c, bottom=90, ylim=(0.0, float(c_max)))
    ax.frame("", "fluctuation events", f"Accuracy rises with coverage ({dataset})")
    ax.yticks([c_max * t for t in _ticks()], fmt="{:.1f}")
    _bars(c, ax, models, counts, "{:d}")
    pax = Axes(c, bottom=90, ylim=(0.0, p_max))
    pax.yticks([p_max * t for t in _ticks()], fmt="{:.3g}", right=True)
    slot = (ax.x1 - ax.x0) / max(len(models), 1)
    pts = [(ax.x0 + slot * (i + 0.5), pax.py(p)) for i, p in enumerate(penalties)]
    if pts:
        c.polyline(pts, "#000000", width=2, label="third term")
        for x, y in pts:
            c.circle(x, y, 3, "#000000")
    c.text(ax.x1 + 45, ax.y1 + 6, "line: third term", size=10)
    return c.render(f"fluctuation_bars {dataset}")


_PLOTTERS = {
    "rc_curve": plot_rc_curve,
    "a_bars": plot_a_bars,
    "b_lines": plot_b_lines,
    "fluctuation_bars": plot_fluctuation_bars,
}


def emit_plots(report: ScoreReport, kinds: Iterable[str], out_dir) -> list:
    """Write one SVG per kind per dataset; return the written paths relative to out_dir."""
    kinds = set(kinds)
    unknown = kinds - set(PLOT_KINDS)
    if unknown:
        raise ReportError(f"unknown plot kind(s): {sorted(unknown)}")
    kinds = [k for k in PLOT_KINDS if k in kinds]
    out_dir = Path(out_dir)
    (out_dir / "plots").mkdir(parents=True, exist_ok=True)
    manifest = []
    for ds in report.datasets:
        group = [m for m in report.models if m.dataset_id == ds]
        for kind in kinds:
            rel = f"plots/{kind}_{_safe(ds)}.svg"
            (out_dir / rel).write_text(_PLOTTERS[kind](group, ds), encoding="utf-8")
            manifest.append(rel)
    return manifest


def write_curves(results: Iterable[ModelResult], out_dir) -> list:
    out_dir = Path(out_dir)
    (out_dir / "curves").mkdir(parents=True, exist_ok=True)
    manifest = []
    for m in results:
        rel = f"curves/{_safe(m.model_id)}_{_safe(m.dataset_id)}.csv"
        (out_dir / rel).write_text(m.curve.to_csv(), encoding="utf-8")
        manifest.append(rel)
    return manifest


def write_report(report: ScoreReport, out_dir, kinds: Iterable[str] = PLOT_KINDS) -> list:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "report.json").write_text(report.to_json(), encoding="utf-8")
    (out_dir / "table.csv").write_bytes(emit_table(report, "csv"))
    manifest = ["report.json", "table.csv"]
    manifest += write_curves(report.models, out_dir)
    manifest += emit_plots(report, kinds, out_dir)
    return manifest
