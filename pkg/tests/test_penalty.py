"""Penalty mechanism tests against a literal piecewise oracle."""

import numpy as np
import pytest

from pink.datamodel import EvalRecord, RubricScore
from pink.penalty import (
    OverCorrectionEvent,
    PenaltyConfig,
    classify,
    component_delta,
    penalize_component,
    penalize_item,
    sweep_thresholds,
)


def piecewise_oracle(m: int, o: int, t: int) -> int:
    """Independent restatement of the two-tier penalty, case by case."""
    delta = m - o
    if delta <= 0:
        return m
    if 1 <= delta <= t:
        return o
    return 0


def test_component_delta_examples():
    assert component_delta(20, 5) == 15
    assert component_delta(12, 12) == 0
    assert component_delta(5, 20) == -15


def test_classify_boundaries():
    cfg = PenaltyConfig(threshold=10)
    assert classify(10, cfg) == "Minor"
    assert classify(11, cfg) == "Major"
    assert classify(0, cfg) == "NoEvent"
    assert classify(-7, cfg) == "NoEvent"
    assert classify(1, cfg) == "Minor"


def test_penalize_component_examples():
    cfg = PenaltyConfig(threshold=10)
    assert penalize_component(20, 5, cfg) == 0      # nullification
    assert penalize_component(18, 10, cfg) == 10    # reversion
    assert penalize_component(7, 12, cfg) == 7      # kept


def test_penalize_component_exhaustive_against_oracle():
    for t in (0, 5, 10, 15, 20):
        cfg = PenaltyConfig(threshold=t)
        for m in range(21):
            for o in range(21):
                assert penalize_component(m, o, cfg) == piecewise_oracle(m, o, t), (
                    m,
                    o,
                    t,
                )


def test_penalize_item_pipeline_figure():
    # Oracle 70 with two +15 inflations nullified: 100 drops to 60.
    oracle = RubricScore((20, 20, 20, 5, 5))
    model = RubricScore((20, 20, 20, 20, 20))
    vec, total, events = penalize_item(model, oracle, PenaltyConfig(), "s", "m")
    assert oracle.total == 70 and model.total == 100
    assert vec == (20, 20, 20, 0, 0)
    assert total == 60
    assert [e.severity for e in events] == ["Major", "Major"]
    assert [e.component_index for e in events] == [3, 4]
    assert all(e.delta == 15 for e in events)


def test_penalize_item_fixed_point():
    score = RubricScore((17, 3, 20, 0, 11))
    vec, total, events = penalize_item(score, score, PenaltyConfig())
    assert vec == score.components
    assert total == score.total
    assert events == []


def test_penalize_item_no_events_when_model_below_oracle():
    model = RubricScore((10, 10, 10, 10, 10))
    oracle = RubricScore((20, 20, 20, 20, 20))
    vec, total, events = penalize_item(model, oracle, PenaltyConfig())
    assert vec == model.components and total == 50 and events == []


def test_penalize_item_arity_mismatch():
    from pink.penalty import ArityMismatch

    with pytest.raises(ArityMismatch):
        penalize_item(RubricScore((1, 2, 3)), RubricScore((1, 2, 3, 4, 5)), PenaltyConfig())


def test_event_invariant_major_iff_above_threshold():
    cfg = PenaltyConfig(threshold=10)
    oracle = RubricScore((0, 0, 0, 0, 0))
    model = RubricScore((1, 10, 11, 20, 0))
    _, _, events = penalize_item(model, oracle, cfg)
    severities = {e.component_index: e.severity for e in events}
    assert severities == {0: "Minor", 1: "Minor", 2: "Major", 3: "Major"}


def test_threshold_monotonicity_of_severity_counts():
    # Raising T never increases Major counts and never decreases Minor counts.
    rng = np.random.default_rng(7)
    items = [
        (RubricScore(tuple(rng.integers(0, 21, 5).tolist())),
         RubricScore(tuple(rng.integers(0, 21, 5).tolist())))
        for _ in range(50)
    ]
    previous = None
    for t in range(0, 21):
        cfg = PenaltyConfig(threshold=t)
        majors = minors = 0
        for model, oracle in items:
            _, _, events = penalize_item(model, oracle, cfg)
            majors += sum(1 for e in events if e.severity == "Major")
            minors += sum(1 for e in events if e.severity == "Minor")
        if previous is not None:
            assert majors <= previous[0]
            assert minors >= previous[1]
        previous = (majors, minors)


def _synthetic_records(seed: int = 42, n_models: int = 5, n_items: int = 200):
    """Seeded population with model-specific over-correction tendencies."""
    rng = np.random.default_rng(seed)
    records = []
    for m in range(n_models):
        model_id = f"model_{m}"
        for i in range(n_items):
            oracle = rng.integers(3, 21, 5)
            inflate = rng.integers(0, 21 - oracle, 5) * (rng.random(5) < 0.15 * (m + 1))
            model = np.minimum(oracle + inflate.astype(int), 20)
            o = RubricScore(tuple(int(x) for x in oracle))
            s = RubricScore(tuple(int(x) for x in model))
            cfg = PenaltyConfig()
            vec, total, _ = penalize_item(s, o, cfg)
            records.append(
                EvalRecord(
                    sample_id=f"item_{i:03d}",
                    model_id=model_id,
                    judge_id="synthetic",
                    run_index=0,
                    oracle=o,
                    model=s,
                    deltas=tuple(int(a - b) for a, b in zip(s.components, o.components)),
                    classifications=tuple(classify(a - b, cfg) for a, b in zip(s.components, o.components)),
                    penalized=vec,
                    penalized_total=total,
                    threshold_used=10,
                )
            )
    return records


def brute_force_tau(xs, ys) -> float:
    """O(n^2) tau-b recomputation used as the sweep oracle."""
    import math

    n = len(xs)
    c = d = 0
    for i in range(n):
        for j in range(i + 1, n):
            a = (xs[i] > xs[j]) - (xs[i] < xs[j])
            b = (ys[i] > ys[j]) - (ys[i] < ys[j])
            if a and b:
                c += 1 if a == b else 0
                d += 1 if a != b else 0
    tie_x = sum(v * (v - 1) // 2 for v in __import__("collections").Counter(xs).values())
    tie_y = sum(v * (v - 1) // 2 for v in __import__("collections").Counter(ys).values())
    n0 = n * (n - 1) // 2
    num = c - d
    den2 = (n0 - tie_x) * (n0 - tie_y)
    if num * num >= den2:
        return 1.0 if num > 0 else -1.0
    return num / math.sqrt(den2)


def test_sweep_self_consistency_at_baseline():
    records = _synthetic_records()
    result = sweep_thresholds(records, [10])
    assert result.tau_vs_baseline[10] == 1.0
    # Penalized totals at T=10 equal those carried on the records themselves.
    per_model = {}
    for r in records:
        per_model[r.model_id] = per_model.get(r.model_id, 0) + r.penalized_total
    assert result.penalized_totals[10] == per_model


def test_sweep_all_deltas_nonpositive_gives_tau_one_everywhere():
    records = []
    rng = np.random.default_rng(3)
    cfg = PenaltyConfig()
    for m in range(4):
        for i in range(30):
            oracle = rng.integers(5, 21, 5)
            model = np.maximum(oracle - rng.integers(0, 5, 5), 0)
            o = RubricScore(tuple(int(x) for x in oracle))
            s = RubricScore(tuple(int(x) for x in model))
            vec, total, _ = penalize_item(s, o, cfg)
            records.append(
                EvalRecord(
                    sample_id=f"i{i}",
                    model_id=f"m{m}",
                    judge_id="j",
                    run_index=0,
                    oracle=o,
                    model=s,
                    deltas=tuple(int(a - b) for a, b in zip(s.components, o.components)),
                    classifications=tuple(classify(int(a - b), cfg) for a, b in zip(s.components, o.components)),
                    penalized=vec,
                    penalized_total=total,
                    threshold_used=10,
                )
            )
    result = sweep_thresholds(records, [0, 5, 10, 15, 20])
    assert all(tau == 1.0 for tau in result.tau_vs_baseline.values())


def test_sweep_curve_matches_independent_recomputation():
    records = _synthetic_records(seed=11)
    t_values = [0, 2, 5, 8, 10, 12, 15, 18, 20]
    result = sweep_thresholds(records, t_values)

    model_ids = sorted({r.model_id for r in records})

    def recompute(t):
        pinks = {}
        for m in model_ids:
            pen = ora = 0
            for rec in records:
                if rec.model_id != m:
                    continue
                item = sum(
                    piecewise_oracle(a, b, t)
                    for a, b in zip(rec.model.components, rec.oracle.components)
                )
                pen += item
                ora += rec.oracle.total
            pinks[m] = pen / ora
        ranking = [m for m, _ in sorted(pinks.items(), key=lambda kv: (-kv[1], kv[0]))]
        return pinks, ranking

    _, base_ranking = recompute(10)
    base_pos = {m: i for i, m in enumerate(base_ranking)}
    for t in t_values:
        pinks, ranking = recompute(t)
        assert result.rankings[t] == ranking
        for m in model_ids:
            assert result.pink_scores[t][m] == pytest.approx(pinks[m], abs=1e-12)
        pos = {m: i for i, m in enumerate(ranking)}
        expected_tau = brute_force_tau(
            [base_pos[m] for m in model_ids], [pos[m] for m in model_ids]
        )
        assert result.tau_vs_baseline[t] == pytest.approx(expected_tau, abs=1e-12)


def test_sweep_rejects_empty_threshold_list():
    with pytest.raises(ValueError):
        sweep_thresholds([], [])
