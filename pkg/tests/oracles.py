"""Slow reference implementations, written from the definitions with plain loops."""

import math
from collections import Counter
from itertools import permutations


def _delta(c, d, metric, marginals):
    if metric == "nominal":
        return 0.0 if c == d else 1.0
    if metric == "interval":
        return (c - d) ** 2
    if metric == "ratio":
        return 0.0 if c + d == 0 else ((c - d) / (c + d)) ** 2
    if metric == "ordinal":
        lo, hi = min(c, d), max(c, d)
        between = sum(n for g, n in marginals.items() if lo <= g <= hi)
        return (between - (marginals[c] + marginals[d]) / 2) ** 2
    raise ValueError(metric)


def alpha_bruteforce(rows, metric):
    """Krippendorff's alpha by enumerating every ordered pair of ratings.

    ``rows`` is a list of per-item rating lists; ``None`` marks a missing cell.
    Returns None when the coefficient is undefined.
    """
    units = [[v for v in row if v is not None] for row in rows]
    units = [u for u in units if len(u) >= 2]
    pooled = [v for u in units for v in u]
    n = len(pooled)
    if n == 0:
        return None
    marginals = Counter(pooled)
    observed = 0.0
    for u in units:
        for i, j in permutations(range(len(u)), 2):
            observed += _delta(u[i], u[j], metric, marginals) / (len(u) - 1)
    expected = 0.0
    for i, j in permutations(range(n), 2):
        expected += _delta(pooled[i], pooled[j], metric, marginals)
    if expected == 0:
        return None
    d_o = observed / n
    d_e = expected / (n * (n - 1))
    return 1 - d_o / d_e


def kappa_bruteforce(a, b):
    n = len(a)
    p_o = sum(1 for x, y in zip(a, b) if x == y) / n
    p_e = 0.0
    for c in set(a) | set(b):
        p_e += (sum(1 for x in a if x == c) / n) * (sum(1 for y in b if y == c) / n)
    if p_e == 1:
        return None
    return (p_o - p_e) / (1 - p_e)


def sums_of_squares_bruteforce(rows):
    n, k = len(rows), len(rows[0])
    grand = 0.0
    for i in range(n):
        for j in range(k):
            grand += rows[i][j]
    grand /= n * k
    ssw = ssb = sst = 0.0
    for i in range(n):
        mean_i = 0.0
        for j in range(k):
            mean_i += rows[i][j]
        mean_i /= k
        for j in range(k):
            ssw += (rows[i][j] - mean_i) ** 2
            sst += (rows[i][j] - grand) ** 2
        ssb += k * (mean_i - grand) ** 2
    return ssw, ssb, sst


def close(a, b, rel=1e-12, abs_=1e-12):
    return math.isclose(a, b, rel_tol=rel, abs_tol=abs_)
