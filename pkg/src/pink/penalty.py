"""Over-correction detection and the two-tier penalty.

For each rubric component the delta is model minus oracle.  A positive delta
is an over-correction event: deltas of 1..threshold revert the component to
the oracle score (Minor), deltas above the threshold nullify it (Major).
All functions here are pure; threshold sweeps recompute penalties from the
stored component vectors without re-grading.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .datamodel import (
    DEFAULT_COMPONENT_MAX,
    DEFAULT_R,
    RubricScore,
)


class ArityMismatch(Exception):
    pass


@dataclass(frozen=True)
class PenaltyConfig:
    threshold: int = 10
    component_max: int = DEFAULT_COMPONENT_MAX
    r: int = DEFAULT_R

    def __post_init__(self):
        if not 0 <= self.threshold <= self.component_max:
            raise ValueError(
                f"threshold {self.threshold} outside [0, {self.component_max}]"
            )


@dataclass(frozen=True)
class OverCorrectionEvent:
    sample_id: str
    model_id: str
    component_index: int
    delta: int
    severity: str  # "Minor" or "Major"


def component_delta(model_r: int, oracle_r: int) -> int:
    """Signed score inflation of the model over the oracle on one component."""
    return model_r - oracle_r


def classify(delta: int, config: PenaltyConfig) -> str:
    """NoEvent for delta <= 0, Minor for 1..threshold, Major above it."""
    if delta <= 0:
        return "NoEvent"
    if delta <= config.threshold:
        return "Minor"
    return "Major"


def penalize_component(model_r: int, oracle_r: int, config: PenaltyConfig) -> int:
    """Penalized component score: keep, revert to oracle, or nullify."""
    delta = model_r - oracle_r
    if delta <= 0:
        return model_r
    if delta <= config.threshold:
        return oracle_r
    return 0


def penalize_item(
    model: RubricScore,
    oracle: RubricScore,
    config: PenaltyConfig,
    sample_id: str = "",
    model_id: str = "",
) -> tuple[tuple[int, ...], int, list[OverCorrectionEvent]]:
    """Apply the per-component penalty to one graded item.

    Returns the penalized component vector, its total, and one event per
    component with a positive delta.
    """
    if len(model.components) != len(oracle.components):
        raise ArityMismatch(
            f"model has {len(model.components)} components, oracle {len(oracle.components)}"
        )
    penalized = []
    events = []
    for r, (m, o) in enumerate(zip(model.components, oracle.components)):
        penalized.append(penalize_component(m, o, config))
        delta = m - o
        if delta > 0:
            events.append(
                OverCorrectionEvent(
                    sample_id=sample_id,
                    model_id=model_id,
                    component_index=r,
                    delta=delta,
                    severity=classify(delta, config),
                )
            )
    vec = tuple(penalized)
    return vec, sum(vec), events


@dataclass
class SweepResult:
    thresholds: list[int]
    # per threshold: model_id -> penalized grand total, and model_id -> PINK
    penalized_totals: dict[int, dict[str, int]] = field(default_factory=dict)
    pink_scores: dict[int, dict[str, float]] = field(default_factory=dict)
    rankings: dict[int, list[str]] = field(default_factory=dict)
    tau_vs_baseline: dict[int, float] = field(default_factory=dict)
    baseline_threshold: int = 10


def sweep_thresholds(records, t_values: list[int], config: PenaltyConfig | None = None) -> SweepResult:
    """Recompute penalties, PINK scores and rankings at each threshold.

    Kendall tau of every ranking is reported against the T=10 baseline
    (recomputed even when 10 is absent from t_values).  No re-grading
    happens: only the stored (model, oracle) component vectors are used.
    """
    from .stats import kendall_tau_b, rank_by_score

    if not t_values:
        raise ValueError("t_values must be non-empty")
    base = config or PenaltyConfig()
    for t in t_values:
        if not 0 <= t <= base.component_max:
            raise ValueError(f"threshold {t} outside [0, {base.component_max}]")

    records = list(records)
    model_ids = sorted({rec.model_id for rec in records})

    def compute_at(t: int) -> tuple[dict[str, int], dict[str, float], list[str]]:
        cfg = PenaltyConfig(threshold=t, component_max=base.component_max, r=base.r)
        pen_totals: dict[str, int] = {m: 0 for m in model_ids}
        per_model_pairs: dict[str, list[tuple[int, int]]] = {m: [] for m in model_ids}
        for rec in sorted(records, key=lambda r: (r.model_id, r.sample_id, r.judge_id, r.run_index)):
            _, total, _ = penalize_item(rec.model, rec.oracle, cfg)
            pen_totals[rec.model_id] += total
            per_model_pairs[rec.model_id].append((total, rec.oracle.total))
        pinks = {
            m: pink_score_from_pairs(per_model_pairs[m]) for m in model_ids
        }
        ranking = rank_by_score(pinks)
        return pen_totals, pinks, ranking

    def pink_score_from_pairs(pairs: list[tuple[int, int]]) -> float:
        pen = sum(p for p, o in pairs if o > 0)
        ora = sum(o for _, o in pairs if o > 0)
        if ora == 0:
            raise ValueError("all oracle totals are zero")
        return pen / ora

    _, _, baseline_ranking = compute_at(10)
    baseline_positions = {m: i for i, m in enumerate(baseline_ranking)}

    out = SweepResult(thresholds=list(t_values))
    for t in t_values:
        pen_totals, pinks, ranking = compute_at(t)
        out.penalized_totals[t] = pen_totals
        out.pink_scores[t] = pinks
        out.rankings[t] = ranking
        ranks_a = [baseline_positions[m] for m in model_ids]
        positions_t = {m: i for i, m in enumerate(ranking)}
        ranks_b = [positions_t[m] for m in model_ids]
        out.tau_vs_baseline[t] = kendall_tau_b(ranks_a, ranks_b)
    return out
