"""DiSCA, Computation Score, DiDMA and NiDMA.

DiSCA for one curve and one worst admissible accuracy::

    total = x / a + y / b - z * sum_i w_i * (d2_i - d1_i) / c_i / sum_i w_i

with ``a`` the maxprob where accuracy first drops below 1, ``b`` the maxprob
where it first drops below the worst admissible accuracy, and the sum over the
curve's fluctuation events. Event i (in increasing coverage) carries weight
``w_i = n - i + 1``, so the most confident fluctuation weighs most.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import NamedTuple, Sequence, Union

from selective_eval.curve import RiskCoverageCurve
from selective_eval.diagnostics import find_fluctuations, first_drop, tolerance_cutoff

WEIGHT_SUM_TOL = 1e-9
TABLE2_THRESHOLDS = (0.95, 0.90, 0.85, 0.80, 0.75, 0.70, 0.65, 0.60, 0.55)
MIN_WORST_ACCURACY = 0.5

CROSSED_HERE = "crossed_here"
CROSSED_EARLIER = "crossed_earlier"
NEVER_CROSSED = "never_crossed"


class ScoreError(ValueError):
    pass


def _check_weights(name: str, values: dict) -> None:
    for k, v in values.items():
        if not math.isfinite(v) or v < 0:
            raise ScoreError(f"weight {k}={v} must be finite and >= 0")
    total = sum(values.values())
    if abs(total - 1.0) > WEIGHT_SUM_TOL:
        keys = "+".join(values)
        raise ScoreError(f"{name}: {keys} must sum to 1 (got {total:.12g})")


@dataclass(frozen=True)
class DiscaWeights:
    x: float = 1 / 3
    y: float = 1 / 3
    z: float = 1 / 3

    def __post_init__(self):
        _check_weights("DiSCA weights", {"x": self.x, "y": self.y, "z": self.z})


@dataclass(frozen=True)
class CompositionWeights:
    p: float = 0.5
    q: float = 0.5
    u: float = 0.5
    v: float = 0.5

    def __post_init__(self):
        _check_weights("DiDMA weights", {"p": self.p, "q": self.q})
        _check_weights("NiDMA weights", {"u": self.u, "v": self.v})


@dataclass(frozen=True)
class DiscaBreakdown:
    a: float
    a_defined: bool
    b: float
    b_crossed: bool
    worst_accuracy: float
    n_fluctuations: int
    term1: float
    term2: float
    term3: float
    total: float

    def to_dict(self) -> dict:
        return asdict(self)


class SweepCell(NamedTuple):
    threshold: float
    breakdown: DiscaBreakdown
    cell_class: str


def fluctuation_penalty(events: Sequence) -> float:
    """Weight-free third term: rank-weighted mean of (d2 - d1) / c over events."""
    n = len(events)
    if n == 0:
        return 0.0
    num = sum((n - e.index + 1) * (e.d2 - e.d1) / e.c_clamped for e in events)
    den = n * (n + 1) / 2
    return num / den


def disca(curve: RiskCoverageCurve, weights: DiscaWeights = DiscaWeights(),
          worst_accuracy: float = 0.9) -> DiscaBreakdown:
    a, a_defined = first_drop(curve)
    b, b_crossed = tolerance_cutoff(curve, worst_accuracy)
    if a <= 0 or b <= 0:
        raise ScoreError(f"non-positive maxprob in DiSCA denominators (a={a}, b={b})")
    events = find_fluctuations(curve)
    term1 = weights.x / a
    term2 = weights.y / b
    term3 = weights.z * fluctuation_penalty(events) if events else 0.0
    return DiscaBreakdown(
        a=a,
        a_defined=a_defined,
        b=b,
        b_crossed=b_crossed,
        worst_accuracy=worst_accuracy,
        n_fluctuations=len(events),
        term1=term1,
        term2=term2,
        term3=term3,
        total=term1 + term2 - term3,
    )


def check_thresholds(thresholds: Sequence[float]) -> tuple:
    ts = tuple(float(t) for t in thresholds)
    if not ts:
        raise ScoreError("threshold sweep is empty")
    for t in ts:
        if not MIN_WORST_ACCURACY <= t <= 1.0:
            raise ScoreError(f"threshold {t} outside [0.5, 1.0]")
    if any(t1 <= t2 for t1, t2 in zip(ts, ts[1:])):
        raise ScoreError(f"thresholds must be strictly decreasing: {list(ts)}")
    return ts


def cell_class(overall_accuracy: float, threshold: float, next_threshold: float) -> str:
    """Table-style annotation for one sweep column.

    never_crossed: overall accuracy meets the column threshold.
    crossed_here: below this column but not below the next one.
    crossed_earlier: already below the next column too.
    """
    if overall_accuracy >= threshold:
        return NEVER_CROSSED
    if overall_accuracy >= next_threshold:
        return CROSSED_HERE
    return CROSSED_EARLIER


def disca_sweep(curve: RiskCoverageCurve, weights: DiscaWeights = DiscaWeights(),
                thresholds: Sequence[float] = TABLE2_THRESHOLDS) -> list:
    ts = check_thresholds(thresholds)
    overall = curve.overall_accuracy
    # the last column is bounded below by the smallest admissible tolerance
    nexts = ts[1:] + (MIN_WORST_ACCURACY,)
    cells = []
    for t, nxt in zip(ts, nexts):
        bd = disca(curve, weights, t)
        cls = cell_class(overall, t, nxt)
        if cls != NEVER_CROSSED:
            assert bd.b_crossed, "overall accuracy below threshold implies a crossing"
        cells.append(SweepCell(t, bd, cls))
    return cells


@dataclass(frozen=True)
class ProcessUsage:
    p_dram: float = 0.0
    p_cpu: float = 0.0
    p_gpu: float = 0.0
    e_dram: float = 0.0
    e_cpu: float = 0.0
    e_gpu: float = 0.0

    def __post_init__(self):
        for name in ("p_dram", "p_cpu", "p_gpu"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ScoreError(f"{name}={v} outside [0, 1]")
        for name in ("e_dram", "e_cpu", "e_gpu"):
            v = getattr(self, name)
            if not math.isfinite(v) or v < 0:
                raise ScoreError(f"{name}={v} must be finite and >= 0")

    def energy(self) -> float:
        return self.p_dram * self.e_dram + self.p_cpu * self.e_cpu + self.p_gpu * self.e_gpu


@dataclass(frozen=True)
class EnergyProfile:
    """Measured energy use, scaled by the datacenter's power usage effectiveness."""

    pue: float
    processes: tuple

    def __post_init__(self):
        if not math.isfinite(self.pue) or self.pue <= 0:
            raise ScoreError(f"pue={self.pue} must be > 0")

    def total_energy(self) -> float:
        return self.pue * sum(p.energy() for p in self.processes)


@dataclass(frozen=True)
class ParamRatio:
    optimal_params: int
    model_params: int

    def __post_init__(self):
        for name in ("optimal_params", "model_params"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, int) or v <= 0:
                raise ScoreError(f"{name} must be a positive integer, got {v!r}")


ComputationInput = Union[EnergyProfile, ParamRatio]


def computation_score(inp: ComputationInput) -> float:
    """Inverse total energy, or optimal/actual parameter count."""
    if isinstance(inp, ParamRatio):
        return inp.optimal_params / inp.model_params
    if isinstance(inp, EnergyProfile):
        e_total = inp.total_energy()
        if not e_total > 0:
            raise ScoreError(f"total energy must be > 0, got {e_total}")
        return 1.0 / e_total
    raise TypeError(f"expected EnergyProfile or ParamRatio, got {type(inp).__name__}")


def computation_input_from_dict(obj: dict) -> ComputationInput:
    if not isinstance(obj, dict) or len(obj) != 1:
        raise ScoreError("computation input needs exactly one of energy_profile, param_ratio")
    (kind, body), = obj.items()
    if not isinstance(body, dict):
        raise ScoreError(f"{kind} must be an object")
    try:
        if kind == "param_ratio":
            return ParamRatio(**body)
        if kind == "energy_profile":
            procs = tuple(ProcessUsage(**p) for p in body.get("processes", []))
            extra = set(body) - {"pue", "processes"}
            if extra:
                raise ScoreError(f"unknown energy_profile key(s): {sorted(extra)}")
            return EnergyProfile(float(body["pue"]), procs)
    except (TypeError, KeyError) as exc:
        raise ScoreError(f"invalid {kind}: {exc}") from None
    raise ScoreError(f"unknown computation input kind {kind!r}")


def computation_input_to_dict(inp: ComputationInput) -> dict:
    if isinstance(inp, ParamRatio):
        return {"param_ratio": asdict(inp)}
    return {"energy_profile": {"pue": inp.pue, "processes": [asdict(p) for p in inp.processes]}}


def didma(disca_total: float, comp_score: float, weights: CompositionWeights) -> float:
    return weights.p * disca_total + weights.q * comp_score


def nidma(didma_score: float, disca_ood_total: float, weights: CompositionWeights) -> float:
    return weights.u * didma_score + weights.v * disca_ood_total
