import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from selective_eval.curve import build_curve
from selective_eval.scores import (
    CROSSED_EARLIER,
    CROSSED_HERE,
    NEVER_CROSSED,
    TABLE2_THRESHOLDS,
    CompositionWeights,
    DiscaWeights,
    EnergyProfile,
    ParamRatio,
    ProcessUsage,
    ScoreError,
    computation_input_from_dict,
    computation_input_to_dict,
    computation_score,
    didma,
    disca,
    disca_sweep,
    nidma,
)
from selective_eval.synth import Calibrated, SynthSpec, generate

from conftest import make_log, samples
from oracle import ref_curve, ref_disca


def test_golden_example(golden_log):
    bd = disca(build_curve(golden_log), DiscaWeights(), 0.70)
    assert (bd.a, bd.a_defined, bd.b, bd.b_crossed) == (0.90, True, 0.90, True)
    assert bd.n_fluctuations == 1
    # one event: d1=2/3 at 0.90, d2=3/4 at 0.85, gap 0.05
    expected_term3 = (1 / 3) * (3 / 4 - 2 / 3) / 0.05
    assert bd.term3 == pytest.approx(expected_term3, abs=1e-12)
    assert bd.term1 == pytest.approx(1 / 3 / 0.9, abs=1e-12)
    assert bd.total == pytest.approx(2 / 3 / 0.9 - expected_term3, abs=1e-9)
    assert bd.total == pytest.approx(0.185185185, abs=1e-9)


def test_single_term_projection(golden_log):
    bd = disca(build_curve(golden_log), DiscaWeights(1, 0, 0), 0.70)
    assert bd.total == pytest.approx(1 / 0.9, abs=1e-12)


@pytest.mark.parametrize("weights", [DiscaWeights(), DiscaWeights(0.2, 0.5, 0.3), DiscaWeights(0, 0, 1)])
def test_all_correct_falls_back_to_lowest_maxprob(weights):
    log = make_log([(0.95, True), (0.8, True), (0.62, True)])
    bd = disca(build_curve(log), weights, 0.9)
    assert not bd.a_defined and not bd.b_crossed
    assert bd.a == bd.b == 0.62
    assert bd.n_fluctuations == 0
    assert bd.total == pytest.approx(weights.x / 0.62 + weights.y / 0.62, abs=1e-12)


def test_weights_must_sum_to_one():
    with pytest.raises(ScoreError, match="sum"):
        DiscaWeights(0.3, 0.3, 0.3)
    with pytest.raises(ScoreError):
        DiscaWeights(1.2, -0.1, -0.1)
    with pytest.raises(ScoreError):
        CompositionWeights(p=0.6, q=0.6)
    assert DiscaWeights().x == 1 / 3


def test_breakdown_to_dict(golden_log):
    d = disca(build_curve(golden_log), DiscaWeights(), 0.7).to_dict()
    assert set(d) == {"a", "a_defined", "b", "b_crossed", "worst_accuracy", "n_fluctuations",
                      "term1", "term2", "term3", "total"}


def test_sweep_classes_on_example(golden_log):
    cells = disca_sweep(build_curve(golden_log), DiscaWeights(), (0.95, 0.70, 0.55))
    assert [c.cell_class for c in cells] == [CROSSED_EARLIER, CROSSED_HERE, NEVER_CROSSED]
    assert [c.threshold for c in cells] == [0.95, 0.70, 0.55]


def test_sweep_overall_093():
    log = generate(SynthSpec(200, Calibrated(0.93), seed=4))
    cells = disca_sweep(build_curve(log))
    assert cells[0].cell_class == CROSSED_HERE
    assert all(c.cell_class == NEVER_CROSSED for c in cells[1:])
    assert len(cells) == len(TABLE2_THRESHOLDS) == 9


def test_sweep_all_correct():
    cells = disca_sweep(build_curve(make_log([(0.9, True), (0.6, True)])))
    assert {c.cell_class for c in cells} == {NEVER_CROSSED}


@pytest.mark.parametrize("bad", [(), (0.9, 0.9), (0.8, 0.9), (0.95, 0.4)])
def test_sweep_rejects_bad_thresholds(golden_log, bad):
    with pytest.raises(ScoreError):
        disca_sweep(build_curve(golden_log), DiscaWeights(), bad)


def test_energy_score():
    profile = EnergyProfile(1.58, (ProcessUsage(p_cpu=1.0, e_cpu=2.0),))
    assert profile.total_energy() == pytest.approx(3.16)
    assert computation_score(profile) == pytest.approx(0.3165, abs=1e-4)


def test_param_ratio_values():
    assert computation_score(ParamRatio(1_000_000, 2_000_000)) == 0.5
    assert computation_score(ParamRatio(1_000_000, 500_000)) == 2.0


def test_computation_input_validation():
    with pytest.raises(ScoreError):
        ParamRatio(0, 10)
    with pytest.raises(ScoreError):
        ProcessUsage(p_cpu=1.5)
    with pytest.raises(ScoreError):
        computation_score(EnergyProfile(1.0, ()))
    with pytest.raises(ScoreError):
        computation_input_from_dict({"flops": {}})


@pytest.mark.parametrize("inp", [
    ParamRatio(3, 7),
    EnergyProfile(1.2, (ProcessUsage(p_gpu=0.5, e_gpu=4.0), ProcessUsage(p_dram=1, e_dram=0.1))),
])
def test_computation_input_round_trip(inp):
    assert computation_input_from_dict(computation_input_to_dict(inp)) == inp


def test_didma_nidma_arithmetic():
    w = CompositionWeights()
    assert didma(0.69, 0.5, w) == pytest.approx(0.595, abs=1e-12)
    assert nidma(0.595, 0.45, w) == pytest.approx(0.5225, abs=1e-12)


@given(st.floats(-10, 10), st.floats(0.01, 10))
def test_projections(d, c):
    assert didma(d, c, CompositionWeights(p=1, q=0)) == d
    assert didma(d, c, CompositionWeights(p=0, q=1)) == c
    assert nidma(d, c, CompositionWeights(u=1, v=0)) == d
    assert nidma(d, c, CompositionWeights(u=0, v=1)) == c


@settings(max_examples=150, deadline=None)
@given(samples, st.sampled_from(TABLE2_THRESHOLDS))
def test_disca_matches_reference(pairs, worst):
    mp, ok = zip(*pairs)
    bd = disca(build_curve(make_log(pairs)), DiscaWeights(), worst)
    ref = ref_disca(ref_curve(mp, ok), 1 / 3, 1 / 3, 1 / 3, worst)
    assert math.isclose(bd.total, ref, rel_tol=1e-12, abs_tol=1e-12)


@settings(max_examples=100, deadline=None)
@given(samples, st.lists(st.floats(0, 1), min_size=3, max_size=3).filter(lambda v: sum(v) > 0.1))
def test_weight_linearity(pairs, raw):
    x, y, z = (v / sum(raw) for v in raw)
    curve = build_curve(make_log(pairs))
    parts = [disca(curve, DiscaWeights(*w), 0.9).total for w in ((1, 0, 0), (0, 1, 0), (0, 0, 1))]
    total = disca(curve, DiscaWeights(x, y, z), 0.9).total
    assert total == pytest.approx(x * parts[0] + y * parts[1] + z * parts[2], rel=1e-12, abs=1e-12)


def test_sweep_b_non_increasing():
    rng = np.random.default_rng(0)
    for _ in range(20):
        log = make_log(list(zip(rng.uniform(0.5, 1, 300).tolist(), (rng.random(300) < 0.8).tolist())))
        bs = [c.breakdown.b for c in disca_sweep(build_curve(log))]
        assert all(b1 >= b2 for b1, b2 in zip(bs, bs[1:]))
