"""Seeded synthetic prediction logs with prescribed curve shapes.

Every generator checks its own output and raises SynthError rather than return
a log that misses the requested shape.

Rows are laid out in decreasing-maxprob order. Maxprobs are distinct, rounded
to 9 decimals and strictly decreasing, so no tie blocks appear.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from selective_eval.curve import auc, build_curve
from selective_eval.diagnostics import (
    DEFAULT_TAIL_COVERAGE,
    detect_plateau,
    find_fluctuations,
    tail_compare,
)
from selective_eval.ingest import PredictionLog
from selective_eval.scores import DiscaWeights, disca

MIN_SAMPLES = 10
MIN_PAIR_SAMPLES = 40
PAIR_WORST_ACCURACY = 0.9
PLATEAU_BAND = 0.05
MAX_ATTEMPTS = 50


class SynthError(ValueError):
    """The requested synthetic log cannot be built."""


@dataclass(frozen=True)
class Calibrated:
    target_accuracy: float


@dataclass(frozen=True)
class Plateau:
    accuracy_level: float
    threshold_floor: float


@dataclass(frozen=True)
class Fluctuating:
    n_events: int
    event_magnitude: float = 0.5


@dataclass(frozen=True)
class Staircase:
    targets: tuple


Shape = Union[Calibrated, Plateau, Fluctuating, Staircase]


@dataclass(frozen=True)
class SynthSpec:
    n_samples: int
    shape: Shape
    seed: int = 0
    model_id: str = "synth"
    dataset_id: str = "synthetic"

    def __post_init__(self):
        if self.n_samples < MIN_SAMPLES:
            raise SynthError(f"n_samples must be >= {MIN_SAMPLES}")
        if self.seed < 0:
            raise SynthError("seed must be unsigned")
        s = self.shape
        unit = []
        if isinstance(s, Calibrated):
            unit = [s.target_accuracy]
        elif isinstance(s, Plateau):
            unit = [s.accuracy_level, s.threshold_floor]
            if s.threshold_floor >= 0.999:
                raise SynthError("threshold_floor must be below 0.999")
        elif isinstance(s, Fluctuating):
            unit = [s.event_magnitude]
            if s.n_events < 0:
                raise SynthError("n_events must be >= 0")
        elif isinstance(s, Staircase):
            unit = list(s.targets)
            if len(s.targets) != 10:
                raise SynthError("staircase needs one accuracy target per decile (10 values)")
        else:
            raise SynthError(f"unknown shape {s!r}")
        if any(not 0.0 <= v <= 1.0 for v in unit):
            raise SynthError(f"shape parameters must lie in [0, 1]: {s}")


def maxprob_grid(n: int, rng: np.random.Generator, high: float = 0.999, low: float = 0.5) -> np.ndarray:
    """n distinct, strictly decreasing maxprobs in (low, high]."""
    step = (high - low) / n
    jitter = rng.uniform(0.0, 0.45, n)
    grid = np.round(high - step * (np.arange(n) + jitter), 9)
    if np.any(np.diff(grid) >= 0):
        raise SynthError(f"n={n} too large for distinct 9-decimal maxprobs")
    return grid


def _log(model_id: str, dataset_id: str, maxprob: np.ndarray, correct: np.ndarray) -> PredictionLog:
    return PredictionLog.from_arrays(model_id, dataset_id, maxprob.tolist(), correct.tolist())


def _calibrated(n, shape, rng):
    ok = np.zeros(n, bool)
    ok[: int(round(shape.target_accuracy * n))] = True
    return maxprob_grid(n, rng), ok


def _plateau(n, shape, rng):
    # error i lands where the running count of expected errors crosses an integer
    err_rate = 1.0 - shape.accuracy_level
    phase = rng.uniform(0.0, 1.0)
    expected = np.arange(n + 1) * err_rate + phase
    ok = np.diff(np.floor(expected)) == 0
    return maxprob_grid(n, rng, low=shape.threshold_floor), ok


def _fluctuating(n, shape, rng):
    k = shape.n_events
    if k > n / 4:
        raise SynthError(f"n_events={k} infeasible for n={n} (need n_events <= n/4)")
    ok = np.ones(n, bool)
    if k == 0:
        ok[n - max(1, n // 10):] = False
        return maxprob_grid(n, rng), ok
    head = max(1, n // 10)
    seg = (n - head) // (k + 1)
    # each segment is a wrong burst followed by a correct burst; the tail is all wrong
    rises = min(seg - 1, max(1, int(round(shape.event_magnitude * seg))))
    pos = head
    for _ in range(k):
        wrong = seg - rises
        shift = int(rng.integers(0, wrong)) if wrong > 1 else 0
        ok[pos: pos + wrong - shift] = False
        ok[pos + wrong - shift: pos + seg] = True
        pos += seg
    ok[pos:] = False
    return maxprob_grid(n, rng), ok


def _staircase_counts(n, targets):
    answered = [((j + 1) * n + 5) // 10 for j in range(10)]
    correct = [int(np.floor(t * k + 0.5)) for t, k in zip(targets, answered)]
    prev_k = prev_c = 0
    for j, (k, c) in enumerate(zip(answered, correct)):
        if not 0 <= c - prev_c <= k - prev_k:
            raise SynthError(f"staircase targets infeasible at decile {j + 1}")
        prev_k, prev_c = k, c
    return answered, correct


def _staircase(n, shape, rng):
    answered, correct = _staircase_counts(n, shape.targets)
    ok = np.zeros(n, bool)
    prev_k = prev_c = 0
    for k, c in zip(answered, correct):
        block = np.zeros(k - prev_k, bool)
        block[: c - prev_c] = True
        ok[prev_k:k] = rng.permutation(block)
        prev_k, prev_c = k, c
    return maxprob_grid(n, rng), ok


def _verify(spec: SynthSpec, log: PredictionLog) -> None:
    curve = build_curve(log)
    shape = spec.shape
    if isinstance(shape, Calibrated):
        if find_fluctuations(curve):
            raise SynthError("calibrated log has a rising accuracy segment")
    elif isinstance(shape, Plateau):
        half = [p.accuracy for p in curve.points if p.coverage >= 0.5]
        if max(half) - min(half) > PLATEAU_BAND:
            raise SynthError(
                f"accuracy range {max(half) - min(half):.4f} over the final half exceeds "
                f"{PLATEAU_BAND}; increase n_samples"
            )
    elif isinstance(shape, Fluctuating):
        got = len(find_fluctuations(curve))
        if got != shape.n_events:
            raise SynthError(f"built {got} fluctuation events, wanted {shape.n_events}")
    elif isinstance(shape, Staircase):
        answered, _ = _staircase_counts(spec.n_samples, shape.targets)
        accs = {round(p.coverage * spec.n_samples): p.accuracy for p in curve.points}
        for k, t in zip(answered, shape.targets):
            if abs(accs[k] - t) > 0.5 / k + 1e-12:
                raise SynthError(f"decile accuracy {accs[k]} misses target {t}")


_BUILDERS = {Calibrated: _calibrated, Plateau: _plateau, Fluctuating: _fluctuating, Staircase: _staircase}


def generate(spec: SynthSpec) -> PredictionLog:
    rng = np.random.default_rng(spec.seed)
    maxprob, ok = _BUILDERS[type(spec.shape)](spec.n_samples, spec.shape, rng)
    log = _log(spec.model_id, spec.dataset_id, maxprob, ok)
    _verify(spec, log)
    return log


# Table 1 pairs ---------------------------------------------------------------
#
# Model B is the same in every case: the most confident half of the samples is
# correct, the rest wrong. Its curve never rises and its first error comes late.
# Model A is more accurate overall (so its AUC is higher) but makes an error
# among its most confident answers, plus a case-specific defect.

CASE_DESCRIPTIONS = {
    1: "AUC tail: A errs among its most confident answers; B is perfect on the low-coverage tail",
    2: "one fluctuation at low coverage in A",
    3: "several fluctuations at low coverage in A",
    4: "a strong fluctuation at high coverage in A",
    5: "fluctuations throughout A's curve",
    6: "high-confidence accuracy plateau in A",
}


def _pair_b(n):
    ok = np.zeros(n, bool)
    ok[: n // 2] = True
    return ok


def _pair_a(case, n, rng):
    ok = np.ones(n, bool)
    top = int(rng.integers(0, 4))
    if case == 1:
        early = rng.choice(max(4, n // 25), size=max(1, n // 100), replace=False)
        ok[early] = False
        ok[top] = False
        ok[n - n // 20:] = False
    elif case == 2:
        ok[top: top + max(1, n // 40)] = False
        ok[n - n // 20:] = False
    elif case == 3:
        ok[top] = False
        for frac in (0.15, 0.25):
            ok[int(frac * n) + int(rng.integers(0, max(1, n // 50)))] = False
    elif case == 4:
        ok[top] = False
        late = int(0.7 * n) + int(rng.integers(0, max(1, n // 40)))
        ok[late: late + max(2, n // 10)] = False
        ok[n - max(1, n // 40):] = False
    elif case == 5:
        period = max(7, n // 10)
        ok[top::period] = False
    elif case == 6:
        err = np.arange(n + 1) * 0.07 + rng.uniform(0.0, 1.0)
        ok = np.diff(np.floor(err)) == 0
        ok[top] = False
    return ok


@dataclass(frozen=True)
class Table1Check:
    case: int
    auc_a: float
    auc_b: float
    disca_a: float
    disca_b: float
    n_fluct_a: int
    n_fluct_b: int
    case_property: bool
    detail: str

    @property
    def ok(self) -> bool:
        return (self.auc_a > self.auc_b and self.disca_b > self.disca_a and self.case_property)

    def summary(self) -> str:
        verdict = "holds" if self.ok else "FAILS"
        return (
            f"table1 case {self.case} predicate {verdict}: "
            f"auc(A)={self.auc_a:.6f} > auc(B)={self.auc_b:.6f}; "
            f"disca(B)={self.disca_b:.6f} > disca(A)={self.disca_a:.6f}; {self.detail}"
        )


def check_table1_pair(case: int, log_a: PredictionLog, log_b: PredictionLog) -> Table1Check:
    ca, cb = build_curve(log_a), build_curve(log_b)
    weights = DiscaWeights()
    ev_a, ev_b = find_fluctuations(ca), find_fluctuations(cb)
    fewer_in_b = len(ev_a) > len(ev_b) == 0
    if case == 1:
        tail = tail_compare(ca, cb, DEFAULT_TAIL_COVERAGE)
        prop = tail.disagreement and tail.mean_acc_tail_b > tail.mean_acc_tail_a
        detail = (f"tail accuracy below coverage {DEFAULT_TAIL_COVERAGE}: "
                  f"B={tail.mean_acc_tail_b:.6f} vs A={tail.mean_acc_tail_a:.6f}")
    elif case in (2, 3, 4, 5):
        valley_cov = [ca.points[_valley_pos(ca, e)].coverage for e in ev_a]
        if case == 2:
            prop = len(ev_a) == 1 and valley_cov[0] <= DEFAULT_TAIL_COVERAGE
        elif case == 3:
            prop = len(ev_a) >= 3 and sum(c <= DEFAULT_TAIL_COVERAGE for c in valley_cov) >= 3
        elif case == 4:
            prop = any(c >= 0.5 for c in valley_cov)
        else:
            prop = (len(ev_a) >= 4 and min(valley_cov) <= DEFAULT_TAIL_COVERAGE
                    and max(valley_cov) >= 0.7)
        prop = prop and fewer_in_b
        detail = f"fluctuation events A={len(ev_a)} B={len(ev_b)}"
    else:
        pa, pb = detect_plateau(ca), detect_plateau(cb)
        prop = pa is not None and not pa.acceptable and (pb is None or pb.acceptable) and fewer_in_b
        detail = f"plateau A={'unacceptable' if pa and not pa.acceptable else pa}, B={pb}"
    return Table1Check(
        case=case,
        auc_a=auc(ca),
        auc_b=auc(cb),
        disca_a=disca(ca, weights, PAIR_WORST_ACCURACY).total,
        disca_b=disca(cb, weights, PAIR_WORST_ACCURACY).total,
        n_fluct_a=len(ev_a),
        n_fluct_b=len(ev_b),
        case_property=prop,
        detail=detail,
    )


def _valley_pos(curve, event):
    # thresholds are distinct on synthetic curves, so c1 identifies the valley
    return curve.thresholds.index(event.c1)


def generate_table1_pair(case: int, n_samples: int, seed: int = 0):
    """Build (A, B) where AUC prefers A but B answers selectively better.

    Retries with fresh draws from the same seeded stream; raises SynthError if
    no attempt satisfies the case predicate.
    """
    if case not in CASE_DESCRIPTIONS:
        raise SynthError(f"Table 1 case must be 1..6, got {case}")
    if n_samples < MIN_PAIR_SAMPLES:
        raise SynthError(f"Table 1 pairs need n_samples >= {MIN_PAIR_SAMPLES}")
    if seed < 0:
        raise SynthError("seed must be unsigned")
    rng = np.random.default_rng([seed, case])
    low = 0.8 if case == 6 else 0.5
    last = None
    for _ in range(MAX_ATTEMPTS):
        grid = maxprob_grid(n_samples, rng, low=low)
        log_a = _log(f"case{case}_A", "table1", grid, _pair_a(case, n_samples, rng))
        log_b = _log(f"case{case}_B", "table1", grid, _pair_b(n_samples))
        last = check_table1_pair(case, log_a, log_b)
        if last.ok:
            return log_a, log_b
    raise SynthError(f"could not build a conforming pair: {last.summary()}; try another seed")
