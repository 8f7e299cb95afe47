import numpy as np
import pytest
from hypothesis import strategies as st

from selective_eval.ingest import PredictionLog


def make_log(pairs, model_id="m", dataset_id="d"):
    """PredictionLog from [(maxprob, correct), ...]."""
    mp, ok = zip(*pairs)
    return PredictionLog.from_arrays(model_id, dataset_id, list(mp), list(ok))


def random_log(rng, n, model_id="m", dataset_id="d", levels=None):
    """Random log; ``levels`` restricts maxprob to a coarse grid so ties are common."""
    if levels:
        mp = rng.integers(1, levels + 1, size=n) / levels
    else:
        mp = rng.uniform(0.5, 1.0, size=n)
    ok = rng.random(n) < rng.uniform(0.3, 1.0)
    return PredictionLog.from_arrays(model_id, dataset_id, mp.tolist(), ok.tolist())


# maxprob drawn from a small grid so tie blocks show up often
maxprobs = st.integers(1, 20).map(lambda k: k / 20)
samples = st.lists(st.tuples(maxprobs, st.booleans()), min_size=1, max_size=60)


@pytest.fixture
def golden_log():
    return make_log([(0.99, True), (0.95, True), (0.90, False), (0.85, True), (0.80, False)])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def curve_from_triples(triples):
    """RiskCoverageCurve from [(coverage, accuracy, threshold), ...]."""
    from selective_eval.curve import RiskCoverageCurve

    cols = list(zip(*triples)) or [(), (), ()]
    return RiskCoverageCurve.from_points(*cols)


# Filled by test_acceptance; echoed after the run so the lines survive output capture.
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split("criterion ")[1].split(":")[0])):
            terminalreporter.write_line(line)
