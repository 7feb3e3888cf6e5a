"""Statistical primitives: Pearson r, Kendall tau-b, weighted kappa, CV.

Conventions used throughout the package:
  - sample (n-1) variance everywhere a variance is needed;
  - rankings derived from scores break ties by model id so results are
    reproducible and auditable;
  - perfect agreement / identity cases return exactly +-1.0 (integer or
    identical-sum arithmetic, no float round-off).
"""

from __future__ import annotations

import math
from typing import Mapping, Sequence


class StatsError(Exception):
    pass


class ZeroVariance(StatsError):
    pass


class AllTied(StatsError):
    pass


class EmptyInput(StatsError):
    pass


class UnknownCategory(StatsError):
    pass


class ZeroMean(StatsError):
    pass


class InsufficientData(StatsError):
    pass


def _check_paired(xs: Sequence[float], ys: Sequence[float], min_n: int = 2) -> None:
    if len(xs) != len(ys):
        raise StatsError(f"paired series of unequal length: {len(xs)} vs {len(ys)}")
    if len(xs) < min_n:
        raise InsufficientData(f"need at least {min_n} pairs, got {len(xs)}")


def pearson(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Product-moment correlation.

    Computed from centered sums with math.fsum; the |r| == 1 cases are
    detected by comparing the squared covariance term against the variance
    product so that identical (or exactly negated) series return exactly 1.0
    or -1.0.
    """
    _check_paired(xs, ys)
    n = len(xs)
    mx = math.fsum(xs) / n
    my = math.fsum(ys) / n
    dx = [x - mx for x in xs]
    dy = [y - my for y in ys]
    sxx = math.fsum(d * d for d in dx)
    syy = math.fsum(d * d for d in dy)
    if sxx == 0.0 or syy == 0.0:
        raise ZeroVariance("correlation undefined for a constant series")
    sxy = math.fsum(a * b for a, b in zip(dx, dy))
    if sxy * sxy >= sxx * syy:
        return 1.0 if sxy > 0 else -1.0
    return sxy / math.sqrt(sxx * syy)


def kendall_tau_b(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Kendall's tau-b with tie correction, by exact pair enumeration.

    All counts are integers, so tie-free identical / reversed orderings give
    exactly +1.0 / -1.0.  O(n^2) pairs; fine for leaderboard-scale inputs.
    """
    _check_paired(xs, ys)
    n = len(xs)
    concordant = discordant = 0
    for i in range(n):
        for j in range(i + 1, n):
            a = (xs[i] > xs[j]) - (xs[i] < xs[j])
            b = (ys[i] > ys[j]) - (ys[i] < ys[j])
            if a == 0 or b == 0:
                continue
            if a == b:
                concordant += 1
            else:
                discordant += 1
    n0 = n * (n - 1) // 2
    denom_sq = (n0 - _tie_term(xs)) * (n0 - _tie_term(ys))
    if denom_sq == 0:
        raise AllTied("tau undefined when either series is entirely tied")
    num = concordant - discordant
    if num * num >= denom_sq:
        return 1.0 if num > 0 else -1.0
    return num / math.sqrt(denom_sq)


def _tie_term(values: Sequence[float]) -> int:
    """Sum of t*(t-1)/2 over tie groups, the tau-b tie correction."""
    counts: dict[float, int] = {}
    for v in values:
        counts[v] = counts.get(v, 0) + 1
    return sum(t * (t - 1) // 2 for t in counts.values())


def weighted_kappa(
    ratings_a: Sequence,
    ratings_b: Sequence,
    categories: Sequence,
    weighting: str = "quadratic",
) -> float:
    """Cohen's weighted kappa over an ordered category set.

    kappa = 1 - sum(w * observed) / sum(w * expected), with linear or
    quadratic disagreement weights.  Perfect agreement returns exactly 1.0.
    """
    if weighting not in ("linear", "quadratic"):
        raise ValueError(f"unknown weighting {weighting!r}")
    if not ratings_a or not ratings_b:
        raise EmptyInput("ratings must be non-empty")
    if len(ratings_a) != len(ratings_b):
        raise StatsError("rating vectors of unequal length")
    index = {c: i for i, c in enumerate(categories)}
    k = len(categories)
    if k < 2:
        raise StatsError("need at least 2 categories")
    for r in list(ratings_a) + list(ratings_b):
        if r not in index:
            raise UnknownCategory(f"rating {r!r} not in declared categories")

    n = len(ratings_a)
    observed = [[0.0] * k for _ in range(k)]
    for a, b in zip(ratings_a, ratings_b):
        observed[index[a]][index[b]] += 1.0
    marg_a = [sum(row) for row in observed]
    marg_b = [sum(observed[i][j] for i in range(k)) for j in range(k)]

    power = 1 if weighting == "linear" else 2
    num = 0.0
    den = 0.0
    for i in range(k):
        for j in range(k):
            w = (abs(i - j) / (k - 1)) ** power
            num += w * observed[i][j] / n
            den += w * (marg_a[i] * marg_b[j]) / (n * n)
    if num == 0.0:
        # No weighted disagreement observed; identical-rating case included.
        return 1.0
    if den == 0.0:
        raise AllTied("expected disagreement is zero with observed disagreement present")
    return 1.0 - num / den


def coefficient_of_variation(values: Sequence[float]) -> float:
    """Sample standard deviation as a percentage of the mean."""
    if len(values) < 2:
        raise InsufficientData("need at least 2 values")
    n = len(values)
    mean = math.fsum(values) / n
    if mean == 0.0:
        raise ZeroMean("CV undefined for zero mean")
    var = math.fsum((v - mean) ** 2 for v in values) / (n - 1)
    return 100.0 * math.sqrt(var) / mean


def sample_stddev(values: Sequence[float]) -> float:
    if len(values) < 2:
        raise InsufficientData("need at least 2 values")
    n = len(values)
    mean = math.fsum(values) / n
    return math.sqrt(math.fsum((v - mean) ** 2 for v in values) / (n - 1))


def rank_by_score(scores: Mapping[str, float]) -> list[str]:
    """Ids ordered best-first by descending score, ties broken by id."""
    return [m for m, _ in sorted(scores.items(), key=lambda kv: (-kv[1], kv[0]))]


def ranks_of(scores: Mapping[str, float]) -> dict[str, int]:
    """1-based rank per id under rank_by_score ordering (a permutation)."""
    return {m: i + 1 for i, m in enumerate(rank_by_score(scores))}
