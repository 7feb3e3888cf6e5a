"""Statistics primitives vs definitional / O(n^2) recomputation oracles."""

import math
import random

import numpy as np
import pytest

from pink.stats import (
    AllTied,
    InsufficientData,
    UnknownCategory,
    ZeroMean,
    ZeroVariance,
    coefficient_of_variation,
    kendall_tau_b,
    pearson,
    rank_by_score,
    ranks_of,
    sample_stddev,
    weighted_kappa,
)


# -- independent oracles ------------------------------------------------------

def pearson_oracle(xs, ys):
    n = len(xs)
    mx = sum(xs) / n
    my = sum(ys) / n
    cov = sum((x - mx) * (y - my) for x, y in zip(xs, ys))
    vx = sum((x - mx) ** 2 for x in xs)
    vy = sum((y - my) ** 2 for y in ys)
    return cov / math.sqrt(vx * vy)


def tau_b_oracle(xs, ys):
    """Full pair enumeration with the textbook tie-corrected denominator."""
    n = len(xs)
    concordant = discordant = 0
    for i in range(n):
        for j in range(i + 1, n):
            a = (xs[i] - xs[j]) * (ys[i] - ys[j])
            if a > 0:
                concordant += 1
            elif a < 0:
                discordant += 1
    def tie_term(vs):
        from collections import Counter

        return sum(c * (c - 1) / 2 for c in Counter(vs).values())

    n0 = n * (n - 1) / 2
    denom = math.sqrt((n0 - tie_term(xs)) * (n0 - tie_term(ys)))
    return (concordant - discordant) / denom


def kappa_oracle(a, b, categories, power):
    """Direct O/E confusion-table computation."""
    idx = {c: i for i, c in enumerate(categories)}
    k = len(categories)
    n = len(a)
    observed = np.zeros((k, k))
    for x, y in zip(a, b):
        observed[idx[x], idx[y]] += 1 / n
    expected = np.outer(observed.sum(axis=1), observed.sum(axis=0))
    weights = np.array(
        [[(abs(i - j) / (k - 1)) ** power for j in range(k)] for i in range(k)]
    )
    return 1 - (weights * observed).sum() / (weights * expected).sum()


def cv_oracle(values):
    n = len(values)
    mean = sum(values) / n
    sd = math.sqrt(sum((v - mean) ** 2 for v in values) / (n - 1))
    return 100 * sd / mean


# -- pearson -------------------------------------------------------------------

def test_pearson_identity_exact():
    xs = [1.0, 2.5, 3.1, 7.7, 9.2]
    assert pearson(xs, xs) == 1.0


def test_pearson_negation_exact():
    xs = [0.3, 1.9, 4.4, 5.5, 8.8, 2.2]
    assert pearson(xs, [-x for x in xs]) == -1.0


def test_pearson_randomized_vs_oracle():
    rng = random.Random(123)
    for _ in range(25):
        n = rng.randint(5, 40)
        xs = [rng.uniform(-10, 10) for _ in range(n)]
        ys = [rng.uniform(-10, 10) for _ in range(n)]
        assert pearson(xs, ys) == pytest.approx(pearson_oracle(xs, ys), abs=1e-9)


def test_pearson_zero_variance():
    with pytest.raises(ZeroVariance):
        pearson([1.0, 1.0, 1.0], [1.0, 2.0, 3.0])


def test_pearson_affine_invariance():
    rng = random.Random(9)
    xs = [rng.uniform(0, 5) for _ in range(20)]
    ys = [rng.uniform(0, 5) for _ in range(20)]
    base = pearson(xs, ys)
    assert pearson([3.5 * x + 2 for x in xs], ys) == pytest.approx(base, abs=1e-12)


# -- kendall tau-b -------------------------------------------------------------

def test_tau_identical_and_reversed_15_items_exact():
    ranking = list(range(15))
    assert kendall_tau_b(ranking, ranking) == 1.0
    assert kendall_tau_b(ranking, ranking[::-1]) == -1.0


def test_tau_random_permutations_vs_oracle():
    rng = random.Random(77)
    for _ in range(25):
        n = rng.randint(4, 14)
        xs = list(range(n))
        ys = xs[:]
        rng.shuffle(ys)
        assert kendall_tau_b(xs, ys) == pytest.approx(tau_b_oracle(xs, ys), abs=1e-9)


def test_tau_with_ties_vs_oracle():
    rng = random.Random(101)
    for _ in range(25):
        n = rng.randint(5, 25)
        xs = [rng.randint(0, 4) for _ in range(n)]
        ys = [rng.randint(0, 4) for _ in range(n)]
        if len(set(xs)) < 2 or len(set(ys)) < 2:
            continue
        assert kendall_tau_b(xs, ys) == pytest.approx(tau_b_oracle(xs, ys), abs=1e-9)


def test_tau_monotone_transform_invariance():
    xs = [3, 1, 4, 1, 5, 9, 2, 6]
    ys = [2, 7, 1, 8, 2, 8, 1, 8]
    assert kendall_tau_b([math.exp(x) for x in xs], ys) == pytest.approx(
        kendall_tau_b(xs, ys), abs=1e-12
    )


def test_tau_all_tied_raises():
    with pytest.raises(AllTied):
        kendall_tau_b([1, 1, 1], [1, 2, 3])


# -- weighted kappa -------------------------------------------------------------

def test_kappa_identical_exact():
    ratings = [0, 3, 5, 2, 1, 4, 5, 0]
    cats = list(range(6))
    assert weighted_kappa(ratings, ratings, cats, "quadratic") == 1.0
    assert weighted_kappa(ratings, ratings, cats, "linear") == 1.0


def test_kappa_symmetry():
    a = [0, 1, 2, 3, 4, 2, 1]
    b = [1, 1, 2, 2, 4, 3, 0]
    cats = list(range(5))
    for weighting in ("linear", "quadratic"):
        assert weighted_kappa(a, b, cats, weighting) == pytest.approx(
            weighted_kappa(b, a, cats, weighting), abs=1e-12
        )


def test_kappa_five_category_fixture_vs_oracle():
    rng = random.Random(55)
    cats = list(range(5))
    for _ in range(25):
        n = rng.randint(10, 60)
        a = [rng.randint(0, 4) for _ in range(n)]
        b = [rng.randint(0, 4) for _ in range(n)]
        for weighting, power in (("linear", 1), ("quadratic", 2)):
            got = weighted_kappa(a, b, cats, weighting)
            want = kappa_oracle(a, b, cats, power)
            assert got == pytest.approx(want, abs=1e-9)


def test_kappa_independent_uniform_near_zero():
    rng = random.Random(2024)
    n = 20000
    cats = list(range(5))
    a = [rng.randint(0, 4) for _ in range(n)]
    b = [rng.randint(0, 4) for _ in range(n)]
    assert abs(weighted_kappa(a, b, cats, "quadratic")) < 0.03


def test_kappa_unknown_category():
    with pytest.raises(UnknownCategory):
        weighted_kappa([0, 7], [0, 1], [0, 1, 2], "quadratic")


# -- coefficient of variation ---------------------------------------------------

def test_cv_constant_zero():
    assert coefficient_of_variation([4.2, 4.2, 4.2]) == 0.0


def test_cv_two_point_hand_value():
    # {9, 11}: sample stddev sqrt(2), mean 10.
    assert coefficient_of_variation([9, 11]) == pytest.approx(
        100 * math.sqrt(2) / 10, abs=1e-12
    )


def test_cv_randomized_vs_oracle():
    rng = random.Random(31)
    for _ in range(25):
        n = rng.randint(2, 30)
        values = [rng.uniform(1, 100) for _ in range(n)]
        assert coefficient_of_variation(values) == pytest.approx(
            cv_oracle(values), abs=1e-9
        )


def test_cv_zero_mean_and_insufficient():
    with pytest.raises(ZeroMean):
        coefficient_of_variation([-1.0, 1.0])
    with pytest.raises(InsufficientData):
        coefficient_of_variation([1.0])
    with pytest.raises(InsufficientData):
        sample_stddev([2.0])


# -- ranking helpers -------------------------------------------------------------

def test_rank_by_score_tie_break_by_id():
    scores = {"b": 0.5, "a": 0.5, "c": 0.9}
    assert rank_by_score(scores) == ["c", "a", "b"]
    assert ranks_of(scores) == {"c": 1, "a": 2, "b": 3}


def test_ranks_are_permutation():
    rng = random.Random(8)
    scores = {f"m{i}": rng.random() for i in range(12)}
    ranks = ranks_of(scores)
    assert sorted(ranks.values()) == list(range(1, 13))
