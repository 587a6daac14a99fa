"""Distances between predictive distributions and goodness-of-fit scores."""

from __future__ import annotations

import math

from .errors import DegenerateInput, EmptyDistribution, LengthMismatch, NotNormalized


def wasserstein1(samples_a, samples_b) -> float:
    """1-Wasserstein distance between two empirical distributions on the line.

    Integrates |F_a^-1(u) - F_b^-1(u)| exactly over the merged grid of
    quantile breakpoints, which reduces to the mean absolute difference of
    sorted samples when both sides have the same size.
    """
    a = sorted(float(x) for x in samples_a)
    b = sorted(float(x) for x in samples_b)
    if not a or not b:
        raise EmptyDistribution("wasserstein1 needs nonempty samples")
    n, m = len(a), len(b)
    if n == m:
        return math.fsum(abs(x - y) for x, y in zip(a, b)) / n
    # walk the merged breakpoints i/n and j/m using integer arithmetic
    i = j = 0
    prev = 0  # in units of 1/(n*m)
    total = []
    while i < n and j < m:
        next_a = (i + 1) * m
        next_b = (j + 1) * n
        cut = min(next_a, next_b)
        total.append((cut - prev) * abs(a[i] - b[j]))
        prev = cut
        if next_a == cut:
            i += 1
        if next_b == cut:
            j += 1
    return math.fsum(total) / (n * m)


def total_variation(p, q, tol: float = 1e-9) -> float:
    """Half the L1 distance between two probability vectors."""
    if len(p) != len(q):
        raise LengthMismatch(f"lengths {len(p)} and {len(q)} differ")
    for v in (p, q):
        if abs(math.fsum(v) - 1.0) > tol or any(x < 0 for x in v):
            raise NotNormalized("probability vector must be nonnegative and sum to 1")
    return min(1.0, 0.5 * math.fsum(abs(x - y) for x, y in zip(p, q)))


def _check_pair(x, y, minimum=2):
    if len(x) != len(y):
        raise LengthMismatch(f"lengths {len(x)} and {len(y)} differ")
    if len(x) < minimum:
        raise DegenerateInput(f"need at least {minimum} points")


def pearson_r(x, y) -> float:
    _check_pair(x, y)
    n = len(x)
    mx = math.fsum(x) / n
    my = math.fsum(y) / n
    dx = [v - mx for v in x]
    dy = [v - my for v in y]
    sxx = math.fsum(v * v for v in dx)
    syy = math.fsum(v * v for v in dy)
    if sxx == 0 or syy == 0:
        raise DegenerateInput("pearson_r undefined for zero variance")
    r = math.fsum(a * b for a, b in zip(dx, dy)) / math.sqrt(sxx * syy)
    return max(-1.0, min(1.0, r))


def rmse(x, y) -> float:
    _check_pair(x, y, minimum=1)
    return math.sqrt(math.fsum((a - b) ** 2 for a, b in zip(x, y)) / len(x))


def binary_loglik(p, outcomes, clip: float = 0.01) -> float:
    """Bernoulli log likelihood with probabilities clipped to [clip, 1 - clip]."""
    _check_pair(p, outcomes, minimum=1)
    total = []
    for pi, o in zip(p, outcomes):
        pi = min(max(pi, clip), 1 - clip)
        total.append(math.log(pi) if o else math.log(1 - pi))
    return math.fsum(total)
