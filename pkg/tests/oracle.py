"""Slow, obviously-correct reference implementations used to cross-check the library.

Nothing here imports selective_eval. Every quantity is recomputed from the raw
(maxprob, correct) pairs with the plainest possible loops.
"""

from __future__ import annotations


def ref_curve(maxprob, correct):
    """List of (coverage, accuracy, threshold): answer a sample iff its maxprob >= t."""
    n = len(maxprob)
    points = []
    for t in sorted(set(maxprob), reverse=True):
        answered = [c for m, c in zip(maxprob, correct) if m >= t]
        points.append((len(answered) / n, sum(1 for c in answered if c) / len(answered), t))
    return points


def ref_auc(points):
    """Float trapezoid rule, accuracy held constant between coverage 0 and the first point."""
    cov0, acc0, _ = points[0]
    area = cov0 * acc0
    for (c0, a0, _), (c1, a1, _) in zip(points, points[1:]):
        area += (c1 - c0) * (a0 + a1) / 2
    return area


def ref_first_drop(points):
    for _, acc, t in points:
        if acc < 1.0:
            return t, True
    return points[-1][2], False


def ref_cutoff(points, worst):
    for _, acc, t in points:
        if acc < worst:
            return t, True
    return points[-1][2], False


def _rising(points, i, j):
    return all(points[k + 1][1] > points[k][1] for k in range(i, j))


def ref_fluctuations(points):
    """Every maximal strictly rising index interval [i, j], i < j, found by brute force.

    Returns (d1, d2, c1, c2, c_clamped) tuples ordered by i.
    """
    n = len(points)
    runs = [(i, j) for i in range(n) for j in range(i + 1, n) if _rising(points, i, j)]
    maximal = [
        (i, j) for i, j in runs
        if not any((k, l) != (i, j) and k <= i and j <= l for k, l in runs)
    ]
    out = []
    for i, j in sorted(maximal):
        (_, d1, c1), (_, d2, c2) = points[i], points[j]
        out.append((d1, d2, c1, c2, max(c1 - c2, 0.001)))
    return out


def ref_disca(points, x, y, z, worst):
    a, _ = ref_first_drop(points)
    b, _ = ref_cutoff(points, worst)
    events = ref_fluctuations(points)
    n = len(events)
    penalty = 0.0
    if n:
        num = sum((n - i) * (d2 - d1) / c for i, (d1, d2, _, _, c) in enumerate(events))
        penalty = num / sum(range(1, n + 1))
    return x / a + y / b - z * penalty
