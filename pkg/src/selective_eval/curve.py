"""Coverage-accuracy curves under the rule "answer iff maxprob >= t".

Records sharing a maxprob value cannot be separated by any threshold, so they
enter the curve as one block and produce a single point.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from selective_eval.ingest import PredictionLog


@dataclass(frozen=True)
class CurvePoint:
    coverage: float
    accuracy: float
    threshold: float


@dataclass(frozen=True)
class RiskCoverageCurve:
    points: tuple
    n_samples: int
    model_id: str = ""
    dataset_id: str = ""

    def __post_init__(self):
        if not self.points:
            raise ValueError("curve has no points")
        if self.n_samples < 1:
            raise ValueError("n_samples must be positive")
        prev_cov, prev_thr = 0.0, float("inf")
        for p in self.points:
            if not prev_cov < p.coverage <= 1.0:
                raise ValueError("coverage must increase strictly within (0, 1]")
            if not 0.0 <= p.accuracy <= 1.0:
                raise ValueError(f"accuracy {p.accuracy} outside [0, 1]")
            if p.threshold > prev_thr:
                raise ValueError("thresholds must not increase with coverage")
            prev_cov, prev_thr = p.coverage, p.threshold
        if self.points[-1].coverage != 1.0:
            raise ValueError("final coverage must be 1")

    @classmethod
    def from_points(cls, coverage, accuracy, threshold, n_samples=None, model_id="", dataset_id=""):
        pts = tuple(
            CurvePoint(float(c), float(a), float(t)) for c, a, t in zip(coverage, accuracy, threshold)
        )
        return cls(pts, n_samples if n_samples is not None else len(pts), model_id, dataset_id)

    def __len__(self):
        return len(self.points)

    @property
    def coverages(self) -> list:
        return [p.coverage for p in self.points]

    @property
    def accuracies(self) -> list:
        return [p.accuracy for p in self.points]

    @property
    def thresholds(self) -> list:
        return [p.threshold for p in self.points]

    @property
    def overall_accuracy(self) -> float:
        return self.points[-1].accuracy

    def to_csv(self) -> str:
        out = io.StringIO()
        out.write("coverage,accuracy,threshold\n")
        for p in self.points:
            out.write(f"{p.coverage:.12g},{p.accuracy:.12g},{p.threshold:.12g}\n")
        return out.getvalue()


def curve_from_arrays(maxprob: Sequence[float], correct: Sequence[bool], model_id="", dataset_id=""):
    mp = np.asarray(maxprob, dtype=np.float64)
    ok = np.asarray(correct, dtype=bool)
    if mp.ndim != 1 or mp.shape != ok.shape or mp.size == 0:
        raise ValueError("maxprob and correct must be equal-length, non-empty 1-D sequences")
    values, inverse = np.unique(mp, return_inverse=True)
    counts = np.bincount(inverse, minlength=values.size)
    hits = np.bincount(inverse[ok], minlength=values.size)
    # np.unique sorts ascending; the curve admits the most confident block first
    answered = np.cumsum(counts[::-1])
    n_correct = np.cumsum(hits[::-1])
    n = int(mp.size)
    coverage = (answered / n).tolist()
    accuracy = (n_correct / answered).tolist()
    thresholds = values[::-1].tolist()
    pts = tuple(CurvePoint(c, a, t) for c, a, t in zip(coverage, accuracy, thresholds))
    return RiskCoverageCurve(pts, n, model_id, dataset_id)


def build_curve(log: PredictionLog) -> RiskCoverageCurve:
    return curve_from_arrays(log.maxprobs, log.corrects, log.model_id, log.dataset_id)


def _fixed_point(values):
    """Floats as integers over one shared power-of-two denominator (exact)."""
    ratios = [v.as_integer_ratio() for v in values]
    shift = max(d.bit_length() - 1 for _, d in ratios)
    return [n << (shift - d.bit_length() + 1) for n, d in ratios], shift


def _area(curve: RiskCoverageCurve, upper: float) -> Fraction:
    """Exact area under accuracy on [0, upper].

    Trapezoids between points, constant extension on [0, first coverage].
    Exact accumulation keeps constant-accuracy curves exactly at their constant.
    """
    pts = curve.points
    up = Fraction(upper)
    if up <= Fraction(pts[0].coverage):
        return up * Fraction(pts[0].accuracy)
    # whole segments below `upper` are summed in scaled integers, the cut segment as a Fraction
    full = 1
    while full < len(pts) and pts[full].coverage <= upper:
        full += 1
    cov, sc = _fixed_point([p.coverage for p in pts[:full]])
    acc, sa = _fixed_point([p.accuracy for p in pts[:full]])
    twice = 2 * cov[0] * acc[0]
    for i in range(1, full):
        twice += (cov[i] - cov[i - 1]) * (acc[i - 1] + acc[i])
    total = Fraction(twice, 1 << (sc + sa + 1))
    if full < len(pts):
        lo, hi = Fraction(pts[full - 1].coverage), Fraction(pts[full].coverage)
        a_lo, a_hi = Fraction(pts[full - 1].accuracy), Fraction(pts[full].accuracy)
        a_up = a_lo + (up - lo) / (hi - lo) * (a_hi - a_lo)
        total += (up - lo) * (a_lo + a_up) / 2
    return total


def auc(curve: RiskCoverageCurve) -> float:
    return float(_area(curve, 1.0))


def mean_accuracy_upto(curve: RiskCoverageCurve, coverage_limit: float) -> float:
    """Average accuracy over coverage in [0, coverage_limit]."""
    if not 0.0 < coverage_limit <= 1.0:
        raise ValueError(f"coverage_limit {coverage_limit} outside (0, 1]")
    return float(_area(curve, coverage_limit) / Fraction(coverage_limit))


def resample(curve: RiskCoverageCurve, n_bins: int) -> RiskCoverageCurve:
    """Step-interpolate the curve onto the coverage grid i/n_bins, i = 1..n_bins.

    Each grid point copies accuracy and threshold from the last block point at
    or below it; grid points left of the first block take the first block.
    """
    if isinstance(n_bins, bool) or not isinstance(n_bins, (int, np.integer)) or n_bins < 1:
        raise ValueError(f"n_bins must be a positive integer, got {n_bins!r}")
    n_bins = int(n_bins)
    covs = curve.coverages
    pts = []
    j = 0
    for i in range(1, n_bins + 1):
        grid = i / n_bins
        while j + 1 < len(covs) and covs[j + 1] <= grid:
            j += 1
        src = curve.points[j]
        pts.append(CurvePoint(grid, src.accuracy, src.threshold))
    return RiskCoverageCurve(tuple(pts), curve.n_samples, curve.model_id, curve.dataset_id)
