import pytest
from hypothesis import given, settings

from selective_eval.curve import build_curve, curve_from_arrays
from selective_eval.diagnostics import (
    detect_plateau,
    find_fluctuations,
    first_drop,
    tail_compare,
    tolerance_cutoff,
)
from selective_eval.synth import generate_table1_pair

from conftest import curve_from_triples, make_log, samples
from oracle import ref_cutoff, ref_first_drop, ref_fluctuations


def curve_of(accs, thresholds=None):
    n = len(accs)
    thresholds = thresholds or [0.99 - 0.01 * i for i in range(n)]
    return curve_from_triples(
        [((i + 1) / n, a, t) for i, (a, t) in enumerate(zip(accs, thresholds))]
    )


EXAMPLE = curve_of([1, 1, 0.667, 0.75, 0.6], [0.99, 0.95, 0.90, 0.85, 0.80])


def test_first_drop_example():
    assert first_drop(EXAMPLE) == (0.90, True)


def test_first_drop_never_drops():
    curve = build_curve(make_log([(0.9, True), (0.6, True)]))
    assert first_drop(curve) == (0.6, False)


def test_first_drop_at_first_point():
    curve = build_curve(make_log([(0.97, False), (0.6, True)]))
    assert first_drop(curve).a == 0.97


def test_tolerance_cutoff_examples():
    assert tolerance_cutoff(EXAMPLE, 0.70) == (0.90, True)
    assert tolerance_cutoff(EXAMPLE, 0.60) == (0.80, False)
    allc = build_curve(make_log([(0.9, True), (0.55, True)]))
    assert tolerance_cutoff(allc, 0.9) == (0.55, False)
    with pytest.raises(ValueError):
        tolerance_cutoff(EXAMPLE, 0.4)


def test_no_fluctuations_when_monotone():
    assert find_fluctuations(curve_of([1, 1, 0.9, 0.8, 0.8, 0.5])) == []


def test_single_fluctuation():
    (e,) = find_fluctuations(curve_of([1, 0.5, 0.667], [0.9, 0.8, 0.7]))
    assert (e.index, e.d1, e.d2, e.c1, e.c2) == (1, 0.5, 0.667, 0.8, 0.7)
    assert e.c_clamped == pytest.approx(0.1)


def test_rising_steps_merge_into_runs():
    events = find_fluctuations(curve_of([1, 0.5, 0.6, 0.7, 0.4, 0.5]))
    assert [(e.d1, e.d2) for e in events] == [(0.5, 0.7), (0.4, 0.5)]
    assert [e.index for e in events] == [1, 2]


def test_flat_step_splits_runs():
    events = find_fluctuations(curve_of([0.5, 0.6, 0.6, 0.7]))
    assert [(e.d1, e.d2) for e in events] == [(0.5, 0.6), (0.6, 0.7)]


def test_gap_clamped():
    (e,) = find_fluctuations(curve_of([1, 0.5, 0.6], [0.9, 0.8, 0.8 - 1e-6]))
    assert e.c_clamped == 0.001


def test_tail_identical_and_constant():
    c = curve_of([1, 0.5, 0.667])
    assert not tail_compare(c, c).disagreement
    hi, lo = curve_of([0.9] * 10), curve_of([0.8] * 10)
    for limit in (0.1, 0.3, 1.0):
        assert not tail_compare(hi, lo, limit).disagreement


def test_tail_case1_pair():
    a, b = generate_table1_pair(1, 200, 1)
    f = tail_compare(build_curve(a), build_curve(b), 0.3)
    assert f.auc_full_a > f.auc_full_b
    assert f.mean_acc_tail_b > f.mean_acc_tail_a
    assert f.disagreement


def _constant(acc, high, low, n=20):
    return curve_of([acc] * n, [high - (high - low) * i / (n - 1) for i in range(n)])


def test_plateau_confident_is_unacceptable():
    p = detect_plateau(_constant(0.95, 0.99, 0.91), 0.05, 0.5, 0.5)
    assert p is not None and not p.acceptable
    assert p.end_coverage == 1.0 and p.end_coverage - p.start_coverage >= 0.5


def test_plateau_unconfident_is_acceptable():
    p = detect_plateau(_constant(0.95, 0.4, 0.1), 0.05, 0.5, 0.5)
    assert p is not None and p.acceptable


def test_no_plateau_on_falling_curve():
    n = 50
    falling = curve_of([1.0 - 0.5 * i / (n - 1) for i in range(n)],
                       [0.99 - 0.01 * i for i in range(n)])
    assert detect_plateau(falling, 0.05, 0.5, 0.5) is None


def test_to_dict_field_names():
    (e,) = find_fluctuations(curve_of([1, 0.5, 0.667]))
    assert set(e.to_dict()) == {"index", "d1", "d2", "c1", "c2", "c_clamped"}
    p = detect_plateau(_constant(0.95, 0.99, 0.91))
    assert set(p.to_dict()) == {"start_coverage", "end_coverage", "accuracy_band",
                                "min_threshold_in_region", "acceptable"}
    f = tail_compare(EXAMPLE, EXAMPLE)
    assert set(f.to_dict()) == {"coverage_limit", "auc_full_a", "auc_full_b",
                                "mean_acc_tail_a", "mean_acc_tail_b", "disagreement"}


@settings(max_examples=200, deadline=None)
@given(samples)
def test_extractions_match_reference(pairs):
    mp, ok = zip(*pairs)
    curve = curve_from_arrays(mp, ok)
    pts = [(p.coverage, p.accuracy, p.threshold) for p in curve.points]
    assert tuple(first_drop(curve)) == ref_first_drop(pts)
    for w in (0.5, 0.7, 0.9, 1.0):
        assert tuple(tolerance_cutoff(curve, w)) == ref_cutoff(pts, w)
    got = [(e.d1, e.d2, e.c1, e.c2, e.c_clamped) for e in find_fluctuations(curve)]
    assert got == ref_fluctuations(pts)


@settings(max_examples=200, deadline=None)
@given(samples)
def test_fluctuation_invariants(pairs):
    curve = build_curve(make_log(pairs))
    events = find_fluctuations(curve)
    assert len(events) <= len(curve.points) // 2 + 1
    for e in events:
        assert e.d2 > e.d1
        assert e.c1 > e.c2
        assert e.c_clamped >= 0.001
    # runs never share a rising step, so peaks come strictly before later valleys
    for prev, nxt in zip(events, events[1:]):
        assert prev.c2 >= nxt.c1
