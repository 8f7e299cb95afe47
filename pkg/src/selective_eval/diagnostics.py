"""Curve diagnostics: DiSCA ingredients and the three ways AUC misranks models.

All scans walk the curve in increasing-coverage (decreasing-threshold) order.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import NamedTuple, Optional

from selective_eval.curve import RiskCoverageCurve, auc, mean_accuracy_upto

MIN_MAXPROB_GAP = 0.001

DEFAULT_BAND_WIDTH = 0.05
DEFAULT_MIN_SPAN = 0.5
DEFAULT_LOW_MAXPROB_CEILING = 0.5
DEFAULT_TAIL_COVERAGE = 0.3


class FirstDrop(NamedTuple):
    a: float
    defined: bool


class Cutoff(NamedTuple):
    b: float
    crossed: bool


@dataclass(frozen=True)
class FluctuationEvent:
    """One valley-to-peak rise of accuracy as coverage grows."""

    index: int
    d1: float
    d2: float
    c1: float
    c2: float
    c_clamped: float

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class TailFinding:
    coverage_limit: float
    auc_full_a: float
    auc_full_b: float
    mean_acc_tail_a: float
    mean_acc_tail_b: float
    disagreement: bool

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class PlateauFinding:
    start_coverage: float
    end_coverage: float
    accuracy_band: float
    min_threshold_in_region: float
    acceptable: bool

    def to_dict(self) -> dict:
        return asdict(self)


def _check_worst_accuracy(worst_accuracy: float) -> None:
    if not 0.5 <= worst_accuracy <= 1.0:
        raise ValueError(f"worst_accuracy {worst_accuracy} outside [0.5, 1.0]")


def first_drop(curve: RiskCoverageCurve) -> FirstDrop:
    """Maxprob at which accuracy first falls below 100%.

    A curve that never drops reports its lowest threshold with defined=False.
    """
    for p in curve.points:
        if p.accuracy < 1.0:
            return FirstDrop(p.threshold, True)
    return FirstDrop(curve.points[-1].threshold, False)


def tolerance_cutoff(curve: RiskCoverageCurve, worst_accuracy: float) -> Cutoff:
    """Maxprob at which accuracy first falls strictly below ``worst_accuracy``.

    Equality still meets the tolerance. If accuracy never falls below it, the
    lowest maxprob (the threshold at full coverage) is returned with crossed=False.
    """
    _check_worst_accuracy(worst_accuracy)
    for p in curve.points:
        if p.accuracy < worst_accuracy:
            return Cutoff(p.threshold, True)
    return Cutoff(curve.points[-1].threshold, False)


def find_fluctuations(curve: RiskCoverageCurve) -> list:
    """Maximal strictly-rising accuracy runs, as FluctuationEvents.

    A flat step ends a run. d1/c1 come from the run's first point (the valley),
    d2/c2 from its last point (the peak).
    """
    pts = curve.points
    events = []
    i = 1
    while i < len(pts):
        if pts[i].accuracy > pts[i - 1].accuracy:
            start = i - 1
            while i + 1 < len(pts) and pts[i + 1].accuracy > pts[i].accuracy:
                i += 1
            valley, peak = pts[start], pts[i]
            events.append(
                FluctuationEvent(
                    index=len(events) + 1,
                    d1=valley.accuracy,
                    d2=peak.accuracy,
                    c1=valley.threshold,
                    c2=peak.threshold,
                    c_clamped=max(valley.threshold - peak.threshold, MIN_MAXPROB_GAP),
                )
            )
        i += 1
    return events


def _sign(x: float) -> int:
    return (x > 0) - (x < 0)


def tail_compare(curve_a: RiskCoverageCurve, curve_b: RiskCoverageCurve,
                 coverage_limit: float = DEFAULT_TAIL_COVERAGE) -> TailFinding:
    """Compare full AUC with mean accuracy over the low-coverage tail [0, coverage_limit]."""
    if not 0.0 < coverage_limit <= 1.0:
        raise ValueError(f"coverage_limit {coverage_limit} outside (0, 1]")
    auc_a, auc_b = auc(curve_a), auc(curve_b)
    tail_a = mean_accuracy_upto(curve_a, coverage_limit)
    tail_b = mean_accuracy_upto(curve_b, coverage_limit)
    s_auc, s_tail = _sign(auc_a - auc_b), _sign(tail_a - tail_b)
    return TailFinding(
        coverage_limit=coverage_limit,
        auc_full_a=auc_a,
        auc_full_b=auc_b,
        mean_acc_tail_a=tail_a,
        mean_acc_tail_b=tail_b,
        disagreement=s_auc != 0 and s_tail != 0 and s_auc != s_tail,
    )


def detect_plateau(curve: RiskCoverageCurve, band_width: float = DEFAULT_BAND_WIDTH,
                   min_span: float = DEFAULT_MIN_SPAN,
                   low_maxprob_ceiling: float = DEFAULT_LOW_MAXPROB_CEILING) -> Optional[PlateauFinding]:
    """Longest region ending at full coverage whose accuracy stays within ``band_width``.

    The plateau is acceptable only if every threshold in it is at or below
    ``low_maxprob_ceiling``, i.e. the model answers that region with low confidence.
    """
    if not band_width > 0:
        raise ValueError("band_width must be > 0")
    if not 0.0 < min_span <= 1.0:
        raise ValueError("min_span must be in (0, 1]")
    if not 0.0 < low_maxprob_ceiling < 1.0:
        raise ValueError("low_maxprob_ceiling must be in (0, 1)")

    pts = curve.points
    last = len(pts) - 1
    lo = hi = pts[last].accuracy
    start = last
    while start > 0:
        acc = pts[start - 1].accuracy
        if max(hi, acc) - min(lo, acc) > band_width:
            break
        lo, hi = min(lo, acc), max(hi, acc)
        start -= 1

    start_cov, end_cov = pts[start].coverage, pts[last].coverage
    if start == last or end_cov - start_cov < min_span:
        return None
    region = pts[start:]
    return PlateauFinding(
        start_coverage=start_cov,
        end_coverage=end_cov,
        accuracy_band=hi - lo,
        min_threshold_in_region=min(p.threshold for p in region),
        acceptable=all(p.threshold <= low_maxprob_ceiling for p in region),
    )
