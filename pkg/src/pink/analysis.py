"""Analysis reports over stored evaluation records.

Every function here is a pure function of (records, config): rebuilding a
report from the same stored records yields identical output.  Rankings are
always 1-based permutations with ties broken by model id.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .datamodel import EvalRecord, component_names
from .metrics import ModelAggregate, oc_rate, pink_score
from .stats import (
    coefficient_of_variation,
    kendall_tau_b,
    pearson,
    rank_by_score,
    ranks_of,
    sample_stddev,
    weighted_kappa,
)


class AnalysisError(Exception):
    pass


class ModelSetMismatch(AnalysisError):
    pass


class NoOverlap(AnalysisError):
    pass


class InsufficientRuns(AnalysisError):
    pass


class SampleSetMismatch(AnalysisError):
    pass


class InsufficientRaters(AnalysisError):
    pass


class UnresolvedMapping(AnalysisError):
    pass


@dataclass
class LeaderboardEntry:
    model_id: str
    pink: float
    bleu: float
    norm_edit_distance: float
    rank_pink: int
    rank_bleu: int
    rank_raw: int
    oc_rate: float

    def to_json_dict(self) -> dict:
        return dict(self.__dict__)


def group_by_model(records: Iterable[EvalRecord]) -> dict[str, list[EvalRecord]]:
    grouped: dict[str, list[EvalRecord]] = defaultdict(list)
    for rec in records:
        grouped[rec.model_id].append(rec)
    return {
        m: sorted(rs, key=lambda r: (r.sample_id, r.judge_id, r.run_index))
        for m, rs in sorted(grouped.items())
    }


def build_leaderboard(aggregates: Sequence[ModelAggregate]) -> list[LeaderboardEntry]:
    """Leaderboard sorted by the penalized normalized score, best first.

    Carries the rank under the pre-penalty rubric aggregate as well, so
    penalty-induced rank movement is visible in one table.
    """
    if not aggregates:
        raise AnalysisError("need at least one model aggregate")
    rank_pink = ranks_of({a.model_id: a.pink for a in aggregates})
    rank_bleu = ranks_of({a.model_id: a.bleu for a in aggregates})
    rank_raw = ranks_of({a.model_id: a.mean_model_total for a in aggregates})
    entries = [
        LeaderboardEntry(
            model_id=a.model_id,
            pink=a.pink,
            bleu=a.bleu,
            norm_edit_distance=a.norm_edit_distance,
            rank_pink=rank_pink[a.model_id],
            rank_bleu=rank_bleu[a.model_id],
            rank_raw=rank_raw[a.model_id],
            oc_rate=a.oc_rate,
        )
        for a in aggregates
    ]
    entries.sort(key=lambda e: e.rank_pink)
    return entries


def ranking_comparison(
    scores_a: Mapping[str, float], scores_b: Mapping[str, float]
) -> dict:
    """Per-model rank movement between two score assignments, plus tau.

    rank_delta is rank_a - rank_b, so a positive value means the model
    improved (moved up) under the b scores.
    """
    if set(scores_a) != set(scores_b):
        raise ModelSetMismatch(
            f"model sets differ: {sorted(set(scores_a) ^ set(scores_b))}"
        )
    if not scores_a:
        raise ModelSetMismatch("empty model sets")
    ranks_a = ranks_of(scores_a)
    ranks_b = ranks_of(scores_b)
    models = sorted(scores_a)
    tau = kendall_tau_b([ranks_a[m] for m in models], [ranks_b[m] for m in models])
    return {
        "models": [
            {
                "model_id": m,
                "rank_a": ranks_a[m],
                "rank_b": ranks_b[m],
                "rank_delta": ranks_a[m] - ranks_b[m],
            }
            for m in models
        ],
        "kendall_tau": tau,
    }


def rubric_heatmap(records: Iterable[EvalRecord]) -> dict:
    """Model x component matrix of over-correction event counts.

    Rows are ordered by total penalized score, best first, matching the
    leaderboard presentation of where events concentrate.
    """
    grouped = group_by_model(records)
    r = len(next(iter(grouped.values()))[0].deltas) if grouped else 5
    rows = []
    order = sorted(
        grouped,
        key=lambda m: (-sum(rec.penalized_total for rec in grouped[m]), m),
    )
    for m in order:
        counts = [0] * r
        for rec in grouped[m]:
            for i, d in enumerate(rec.deltas):
                if d > 0:
                    counts[i] += 1
        rows.append({"model_id": m, "counts": counts})
    return {"components": list(component_names(r)), "rows": rows}


DELTA_BIN_WIDTH = 5
DELTA_RANGE = (-100, 100)


def delta_bin_label(lo: int, hi: int) -> str:
    return f"({lo},{hi}]" if lo != DELTA_RANGE[0] else f"[{lo},{hi}]"


def score_difference_distribution(records: Iterable[EvalRecord]) -> dict:
    """Per-model histogram of (model total - oracle total), bin width 5.

    Bins are left-open right-closed over [-100, 100]; the lowest bin also
    includes its left edge so the integer delta -100 is representable.
    """
    lo, hi = DELTA_RANGE
    edges = list(range(lo, hi + 1, DELTA_BIN_WIDTH))
    labels = [delta_bin_label(edges[i], edges[i + 1]) for i in range(len(edges) - 1)]
    grouped = group_by_model(records)
    out_rows = []
    for m, recs in grouped.items():
        counts = [0] * (len(edges) - 1)
        for rec in recs:
            delta = rec.model.total - rec.oracle.total
            idx = max(0, math.ceil((delta - lo) / DELTA_BIN_WIDTH) - 1)
            counts[idx] += 1
        out_rows.append({"model_id": m, "counts": counts})
    return {"bins": labels, "rows": out_rows}


def penalty_scatter(records: Iterable[EvalRecord]) -> dict:
    """One (pre-penalty, post-penalty) point per record, grouped by model."""
    grouped = group_by_model(records)
    rows = []
    for m, recs in grouped.items():
        points = [
            {
                "sample_id": rec.sample_id,
                "pre": rec.model.total,
                "post": rec.penalized_total,
            }
            for rec in recs
        ]
        rows.append({"model_id": m, "points": points})
    return {"rows": rows}


def _align_by_key(
    records_a: Iterable[EvalRecord], records_b: Iterable[EvalRecord]
) -> tuple[list[EvalRecord], list[EvalRecord], int]:
    index_a = {(r.sample_id, r.model_id): r for r in records_a}
    index_b = {(r.sample_id, r.model_id): r for r in records_b}
    keys = sorted(set(index_a) & set(index_b))
    dropped = len(set(index_a) ^ set(index_b))
    return [index_a[k] for k in keys], [index_b[k] for k in keys], dropped


def cross_grader_report(
    records_judge_a: Iterable[EvalRecord],
    records_judge_b: Iterable[EvalRecord],
    kappa_weighting: str = "quadratic",
) -> dict:
    """Agreement between two judges at every pipeline stage.

    Sample-level stats compare raw grading totals and penalized totals;
    model-level stats compare the per-model normalized scores and the final
    rankings.  Records present under only one judge are dropped pairwise.
    """
    aligned_a, aligned_b, dropped = _align_by_key(records_judge_a, records_judge_b)
    if not aligned_a:
        raise NoOverlap("no (sample, model) pairs shared between the two judges")

    categories = list(range(0, 101))
    grading_a = [r.model.total for r in aligned_a]
    grading_b = [r.model.total for r in aligned_b]
    pen_a = [r.penalized_total for r in aligned_a]
    pen_b = [r.penalized_total for r in aligned_b]

    models = sorted({r.model_id for r in aligned_a})
    pink_a = {m: pink_score([r for r in aligned_a if r.model_id == m]) for m in models}
    pink_b = {m: pink_score([r for r in aligned_b if r.model_id == m]) for m in models}
    ranks_a = ranks_of(pink_a)
    ranks_b = ranks_of(pink_b)

    report = {
        "judge_a": aligned_a[0].judge_id,
        "judge_b": aligned_b[0].judge_id,
        "n_pairs": len(aligned_a),
        "dropped_unaligned": dropped,
        "kappa_weighting": kappa_weighting,
        "stages": {
            "grading_sample": {
                "pearson_r": pearson(grading_a, grading_b),
                "kappa": weighted_kappa(grading_a, grading_b, categories, kappa_weighting),
            },
            "penalized_sample": {
                "pearson_r": pearson(pen_a, pen_b),
                "kappa": weighted_kappa(pen_a, pen_b, categories, kappa_weighting),
            },
            "pink_model": {
                "pearson_r": pearson([pink_a[m] for m in models], [pink_b[m] for m in models])
                if len(models) >= 2
                else 1.0,
            },
            "final_rank": {
                "kendall_tau": kendall_tau_b(
                    [ranks_a[m] for m in models], [ranks_b[m] for m in models]
                )
                if len(models) >= 2
                else 1.0,
            },
        },
        "pink_by_model": {
            m: {"judge_a": pink_a[m], "judge_b": pink_b[m]} for m in models
        },
    }
    return report


def run_stability(runs: Sequence[Iterable[EvalRecord]], kappa_weighting: str = "quadratic") -> dict:
    """Stability of the normalized score across repeated gradings of one model.

    Reports the per-run scores, their coefficient of variation, and the mean
    pairwise kappa over penalized totals aligned by sample.
    """
    run_lists = [sorted(run, key=lambda rec: rec.sample_id) for run in runs]
    if len(run_lists) < 2:
        raise InsufficientRuns(f"need >= 2 runs, got {len(run_lists)}")
    shared = set.intersection(*(set(r.sample_id for r in run) for run in run_lists))
    if not shared:
        raise NoOverlap("runs share no samples")
    filtered = [
        [r for r in run if r.sample_id in shared] for run in run_lists
    ]
    pinks = [pink_score(run) for run in filtered]
    categories = list(range(0, 101))
    kappas = []
    for i in range(len(filtered)):
        for j in range(i + 1, len(filtered)):
            a = [r.penalized_total for r in filtered[i]]
            b = [r.penalized_total for r in filtered[j]]
            kappas.append(weighted_kappa(a, b, categories, kappa_weighting))
    return {
        "n_runs": len(filtered),
        "n_samples": len(shared),
        "pink_per_run": pinks,
        "pink_mean": math.fsum(pinks) / len(pinks),
        "pink_cv_percent": coefficient_of_variation(pinks),
        "mean_pairwise_kappa": math.fsum(kappas) / len(kappas),
        "kappa_weighting": kappa_weighting,
    }


def prompt_sensitivity(records_by_variant: Mapping[str, Iterable[EvalRecord]]) -> dict:
    """Normalized score per rubric prompt variant, per model, with spread."""
    variants = sorted(records_by_variant)
    if len(variants) < 2:
        raise AnalysisError("need >= 2 prompt variants")
    per_variant: dict[str, dict[str, list[EvalRecord]]] = {
        v: group_by_model(records_by_variant[v]) for v in variants
    }
    models = sorted(per_variant[variants[0]])
    sample_sets = {
        v: {m: {r.sample_id for r in per_variant[v].get(m, [])} for m in models}
        for v in variants
    }
    for v in variants[1:]:
        if sorted(per_variant[v]) != models:
            raise SampleSetMismatch(f"variant {v!r} covers a different model set")
        for m in models:
            if sample_sets[v][m] != sample_sets[variants[0]][m]:
                raise SampleSetMismatch(
                    f"variant {v!r} covers a different sample set for model {m!r}"
                )
    rows = []
    rank_per_variant = {
        v: ranks_of({m: pink_score(per_variant[v][m]) for m in models}) for v in variants
    }
    for m in models:
        pinks = {v: pink_score(per_variant[v][m]) for v in variants}
        values = [pinks[v] for v in variants]
        rows.append(
            {
                "model_id": m,
                "pink_per_variant": pinks,
                "stddev": sample_stddev(values),
                "rank_per_variant": {v: rank_per_variant[v][m] for v in variants},
            }
        )
    return {"variants": variants, "rows": rows}


def mitigation_compare(
    original_records: Iterable[EvalRecord],
    mitigated_records: Iterable[EvalRecord],
) -> dict:
    """Per-model change in normalized score and OC rate under the mitigated
    OCR prompt, over the shared (model, sample) set."""
    orig = group_by_model(original_records)
    mit = group_by_model(mitigated_records)
    shared_models = sorted(set(orig) & set(mit))
    skipped = sorted(set(orig) ^ set(mit))
    if not shared_models:
        raise SampleSetMismatch("no models present in both record sets")
    rows = []
    for m in shared_models:
        samples = {r.sample_id for r in orig[m]} & {r.sample_id for r in mit[m]}
        if not samples:
            raise SampleSetMismatch(f"model {m!r} shares no samples across prompts")
        o = [r for r in orig[m] if r.sample_id in samples]
        g = [r for r in mit[m] if r.sample_id in samples]
        pink_o, pink_m = pink_score(o), pink_score(g)
        oc_o, oc_m = oc_rate(o), oc_rate(g)
        rows.append(
            {
                "model_id": m,
                "pink_original": pink_o,
                "pink_mitigated": pink_m,
                "pink_delta": pink_m - pink_o,
                "oc_original_pct": 100 * oc_o,
                "oc_mitigated_pct": 100 * oc_m,
                "oc_delta_pp": 100 * (oc_m - oc_o),
                "n_samples": len(samples),
            }
        )
    return {
        "rows": rows,
        "skipped_models": skipped,
        "averages": {
            "pink_delta": math.fsum(r["pink_delta"] for r in rows) / len(rows),
            "oc_delta_pp": math.fsum(r["oc_delta_pp"] for r in rows) / len(rows),
        },
    }


def human_agreement(
    human_grades: Mapping[str, Mapping[str, int]],
    auto_totals: Mapping[str, float],
    kappa_weighting: str = "quadratic",
) -> dict:
    """Inter-rater kappas and the human-vs-auto correlation.

    Human grades are on 0-10; automated totals on 0-100 are divided by 10
    before correlating against the mean human grade.  The inter-rater kappa
    is reported pairwise plus its mean.
    """
    raters = sorted(human_grades)
    if len(raters) < 2:
        raise InsufficientRaters(f"need >= 2 raters, got {len(raters)}")
    shared = set.intersection(*(set(human_grades[r]) for r in raters)) & set(auto_totals)
    if not shared:
        raise NoOverlap("no samples graded by all raters and the auto grader")
    samples = sorted(shared)
    categories = list(range(0, 11))
    pairwise = []
    for i in range(len(raters)):
        for j in range(i + 1, len(raters)):
            a = [human_grades[raters[i]][s] for s in samples]
            b = [human_grades[raters[j]][s] for s in samples]
            pairwise.append(
                {
                    "rater_a": raters[i],
                    "rater_b": raters[j],
                    "kappa": weighted_kappa(a, b, categories, kappa_weighting),
                }
            )
    mean_human = [
        math.fsum(human_grades[r][s] for r in raters) / len(raters) for s in samples
    ]
    auto = [auto_totals[s] / 10.0 for s in samples]
    return {
        "n_samples": len(samples),
        "raters": raters,
        "kappa_weighting": kappa_weighting,
        "pairwise_kappa": pairwise,
        "mean_pairwise_kappa": math.fsum(p["kappa"] for p in pairwise) / len(pairwise),
        "pearson_mean_human_vs_auto": pearson(mean_human, auto),
    }


def preference_aggregate(
    preferences: Sequence[Mapping],
    pink_display_scores: Mapping[str, float],
    bracket_edges: Sequence[float] | None = None,
) -> dict:
    """Overall and per-bracket preference percentages.

    Each preference carries {sample_id, chosen} with chosen already resolved
    to PINK / BLEU / Neither.  Brackets are assigned by the sample's
    PINK-side displayed score (0-10); default bracket edges are the
    quartiles of those scores.
    """
    if not preferences:
        return {
            "n": 0,
            "overall": {"PINK": 0.0, "BLEU": 0.0, "Neither": 0.0},
            "brackets": [],
        }
    for p in preferences:
        if p["sample_id"] not in pink_display_scores:
            raise UnresolvedMapping(
                f"preference references unknown sample {p['sample_id']!r}"
            )
        if p["chosen"] not in ("PINK", "BLEU", "Neither"):
            raise UnresolvedMapping(f"unresolved choice {p['chosen']!r}")

    def tally(prefs):
        n = len(prefs)
        counts = {"PINK": 0, "BLEU": 0, "Neither": 0}
        for p in prefs:
            counts[p["chosen"]] += 1
        return {k: (counts[k] * 100) / n for k in counts}, counts

    overall, counts = tally(preferences)

    scores = sorted(pink_display_scores[p["sample_id"]] for p in preferences)
    if bracket_edges is None:
        bracket_edges = [
            scores[len(scores) // 4],
            scores[len(scores) // 2],
            scores[(3 * len(scores)) // 4],
        ]
    edges = [float("-inf"), *bracket_edges, float("inf")]
    brackets = []
    for i in range(len(edges) - 1):
        lo, hi = edges[i], edges[i + 1]
        prefs = [
            p
            for p in preferences
            if lo < pink_display_scores[p["sample_id"]] <= hi
        ]
        if not prefs:
            brackets.append(
                {"range": [lo, hi], "n": 0, "percentages": {"PINK": 0.0, "BLEU": 0.0, "Neither": 0.0}}
            )
            continue
        pct, _ = tally(prefs)
        brackets.append({"range": [lo, hi], "n": len(prefs), "percentages": pct})
    return {
        "n": len(preferences),
        "counts": counts,
        "overall": overall,
        "brackets": brackets,
        "bracket_edges": list(bracket_edges),
    }


def discrepancy_breakdown(labels: Sequence[str]) -> dict:
    """Class percentages over labeled (gt, ocr) pairs.

    Percentages are over the discrepant pairs only; the combined
    formatting-involved figure is FormattingOnly + IncludesFormatting.
    """
    counts = {
        "NoDiscrepancy": 0,
        "FormattingOnly": 0,
        "IncludesFormatting": 0,
        "SemanticOnly": 0,
    }
    for label in labels:
        if label not in counts:
            raise AnalysisError(f"unknown discrepancy label {label!r}")
        counts[label] += 1
    discrepant = sum(v for k, v in counts.items() if k != "NoDiscrepancy")
    pct = {
        k: (counts[k] * 100) / discrepant if discrepant else 0.0
        for k in counts
        if k != "NoDiscrepancy"
    }
    return {
        "n_pairs": len(labels),
        "n_discrepant": discrepant,
        "counts": counts,
        "percent_of_discrepant": pct,
        "formatting_involved_pct": pct.get("FormattingOnly", 0.0)
        + pct.get("IncludesFormatting", 0.0),
    }
