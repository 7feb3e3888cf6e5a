"""End-to-end pipeline commands: grade, score, sweep, repro, mitigate, label.

Each command is a plain function taking a PipelineConfig and returning the
data it wrote, so the CLI stays a thin argument-parsing shell and tests can
drive the pipeline in-process.
"""

from __future__ import annotations

import csv
import logging
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import analysis, metrics, store
from .config import PipelineConfig
from .datamodel import (
    Corpus,
    EvalRecord,
    TranscriptionSet,
    component_names,
    load_corpus,
    load_transcriptions,
)
from .judge import Judge, JudgeError, grade_pair, label_discrepancy, make_judge
from .penalty import classify, penalize_item, sweep_thresholds

log = logging.getLogger(__name__)


def load_inputs(config: PipelineConfig) -> tuple[Corpus, TranscriptionSet]:
    corpus = load_corpus(config.corpus)
    merged = TranscriptionSet()
    for path in config.transcriptions:
        tset = load_transcriptions(path, corpus)
        for key, t in tset.entries.items():
            if key in merged.entries:
                from .datamodel import DuplicateKey

                raise DuplicateKey(key, 0)
            merged.entries[key] = t
    return corpus, merged


def build_manifest(config: PipelineConfig, extra: dict | None = None) -> dict:
    manifest = {
        "config_hash": store.dict_sha256(config.to_json_dict()),
        "corpus_hash": store.file_sha256(config.corpus),
        "judge_ids": [j.judge_id for j in config.judges],
        "bleu_variant": metrics.BLEU_VARIANT,
        "bleu_mode": config.bleu_mode,
        "penalty_threshold": config.penalty.threshold,
        "runs": config.runs,
    }
    if extra:
        manifest.update(extra)
    return manifest


def report_meta(config: PipelineConfig) -> dict:
    return {
        "config_hash": store.dict_sha256(config.to_json_dict()),
        "corpus_hash": store.file_sha256(config.corpus),
        "judge_ids": [j.judge_id for j in config.judges],
    }


# -- grade ---------------------------------------------------------------------


def cmd_grade(config: PipelineConfig) -> dict:
    """Grade every (sample x model x judge x run), penalize, and store.

    Failed gradings are logged and excluded; reruns touch only cache misses
    because every grading is content-addressed.
    """
    corpus, tset = load_inputs(config)
    judges = [make_judge(jc, config.cache_dir) for jc in config.judges]
    records: list[EvalRecord] = []
    failures: list[dict] = []
    r = config.penalty.r
    component_max = config.penalty.component_max

    def grade_one(judge: Judge, run_index: int, transcription):
        sample = corpus.get(transcription.sample_id)
        oracle, model = grade_pair(
            judge, sample, transcription, run_index, r=r, component_max=component_max
        )
        vec, total, _ = penalize_item(model, oracle, config.penalty)
        deltas = tuple(
            m - o for m, o in zip(model.components, oracle.components)
        )
        return EvalRecord(
            sample_id=sample.sample_id,
            model_id=transcription.model_id,
            judge_id=judge.config.judge_id,
            run_index=run_index,
            oracle=oracle,
            model=model,
            deltas=deltas,
            classifications=tuple(classify(d, config.penalty) for d in deltas),
            penalized=vec,
            penalized_total=total,
            threshold_used=config.penalty.threshold,
            ocr_variant=transcription.prompt_variant,
            rubric_variant=judge.config.rubric_prompt_variant,
        )

    entries = sorted(tset.entries.values(), key=lambda t: t.key)
    for judge in judges:
        tasks = [
            (judge, run_index, t) for run_index in range(config.runs) for t in entries
        ]
        with ThreadPoolExecutor(max_workers=judge.config.parallelism) as pool:
            futures = {pool.submit(grade_one, *task): task for task in tasks}
            for future, task in futures.items():
                _, run_index, t = task
                try:
                    records.append(future.result())
                except JudgeError as exc:
                    failures.append(
                        {
                            "sample_id": t.sample_id,
                            "model_id": t.model_id,
                            "judge_id": judge.config.judge_id,
                            "run_index": run_index,
                            "ocr_variant": t.prompt_variant,
                            "error": type(exc).__name__,
                            "message": str(exc),
                        }
                    )

    for rec in records:
        rec.validate()
    store.write_records(records, config.store_dir)
    store.write_failures(failures, config.store_dir)
    attempted = len(records) + len(failures)
    summary = {
        "n_records": len(records),
        "n_failures": len(failures),
        "failure_pct": 100.0 * len(failures) / attempted if attempted else 0.0,
        "judge_calls": {j.config.judge_id: j.judge_calls for j in judges},
        "cache_hits": {j.config.judge_id: j.cache_hits for j in judges},
    }
    store.write_manifest(
        config.store_dir,
        build_manifest(config, {"n_records": len(records), "n_failures": len(failures)}),
    )
    if failures:
        log.warning("%d grading failures excluded from the store", len(failures))
    return summary


# -- score ---------------------------------------------------------------------


def primary_records(config: PipelineConfig, records: list[EvalRecord],
                    ocr_variant: str = "standard") -> list[EvalRecord]:
    judge_id = config.primary_judge.judge_id
    return [
        r for r in records if r.judge_id == judge_id and r.ocr_variant == ocr_variant
    ]


def cmd_score(config: PipelineConfig) -> dict:
    """Aggregate the record store into the leaderboard and core reports."""
    corpus, tset = load_inputs(config)
    records = primary_records(config, store.read_records(config.store_dir))
    if not records:
        raise store.MissingStore(
            "record store holds no standard-variant records for the primary judge"
        )
    grouped = analysis.group_by_model(records)
    aggregates = []
    for model_id, recs in grouped.items():
        pairs = [
            (corpus.get(t.sample_id).gt_transcription, t.text)
            for t in tset.for_model(model_id)
        ]
        aggregates.append(
            metrics.aggregate_model(model_id, recs, pairs, bleu_mode=config.bleu_mode)
        )
    entries = analysis.build_leaderboard(aggregates)

    pink_scores = {a.model_id: a.pink for a in aggregates}
    bleu_scores = {a.model_id: a.bleu for a in aggregates}
    raw_scores = {a.model_id: a.mean_model_total for a in aggregates}
    rank_deltas = {
        "bleu_vs_pink": analysis.ranking_comparison(bleu_scores, pink_scores),
        "raw_vs_pink": analysis.ranking_comparison(raw_scores, pink_scores),
    }
    heatmap = analysis.rubric_heatmap(records)
    delta_hist = analysis.score_difference_distribution(records)
    scatter = analysis.penalty_scatter(records)

    write_score_reports(
        config,
        entries=entries,
        aggregates=aggregates,
        rank_deltas=rank_deltas,
        heatmap=heatmap,
        delta_hist=delta_hist,
        scatter=scatter,
    )
    return {
        "leaderboard": entries,
        "aggregates": aggregates,
        "rank_deltas": rank_deltas,
        "heatmap": heatmap,
        "delta_hist": delta_hist,
        "scatter": scatter,
    }


def write_score_reports(config, entries, aggregates, rank_deltas, heatmap,
                        delta_hist, scatter) -> None:
    report_dir = Path(config.report_dir)
    report_dir.mkdir(parents=True, exist_ok=True)
    meta = report_meta(config)

    _write_json(report_dir / "leaderboard.json", {
        "meta": meta,
        "entries": [e.to_json_dict() for e in entries],
        "aggregates": [a.to_json_dict() for a in aggregates],
    })
    with open(report_dir / "leaderboard.csv", "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(
            ["model_id", "pink", "bleu", "norm_edit_distance", "oc_rate",
             "rank_pink", "rank_bleu", "rank_raw"]
        )
        for e in entries:
            writer.writerow(
                [e.model_id, f"{e.pink:.6f}", f"{e.bleu:.6f}",
                 f"{e.norm_edit_distance:.6f}", f"{e.oc_rate:.6f}",
                 e.rank_pink, e.rank_bleu, e.rank_raw]
            )

    _write_json(report_dir / "rank_deltas.json", {"meta": meta, **rank_deltas})

    with open(report_dir / "heatmap.csv", "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["model_id", *heatmap["components"]])
        for row in heatmap["rows"]:
            writer.writerow([row["model_id"], *row["counts"]])

    with open(report_dir / "delta_hist.csv", "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["model_id", "bin", "count"])
        for row in delta_hist["rows"]:
            for label, count in zip(delta_hist["bins"], row["counts"]):
                writer.writerow([row["model_id"], label, count])

    with open(report_dir / "scatter.csv", "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["model_id", "sample_id", "pre_penalty_total", "post_penalty_total"])
        for row in scatter["rows"]:
            for point in row["points"]:
                writer.writerow([row["model_id"], point["sample_id"],
                                 point["pre"], point["post"]])

    store.write_manifest(report_dir, build_manifest(config))


def _write_json(path: Path, obj: dict) -> None:
    import json

    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(obj, fh, ensure_ascii=False, indent=2, sort_keys=True)
        fh.write("\n")


# -- sweep ---------------------------------------------------------------------


def cmd_sweep(config: PipelineConfig, t_values: list[int] | None = None) -> dict:
    records = primary_records(config, store.read_records(config.store_dir))
    if not records:
        raise store.MissingStore("record store is empty")
    t_values = t_values if t_values is not None else config.sweep_thresholds
    result = sweep_thresholds(records, t_values, config.penalty)
    payload = {
        "meta": report_meta(config),
        "baseline_threshold": result.baseline_threshold,
        "thresholds": result.thresholds,
        "tau_vs_baseline": {str(t): result.tau_vs_baseline[t] for t in t_values},
        "rankings": {str(t): result.rankings[t] for t in t_values},
        "pink_scores": {str(t): result.pink_scores[t] for t in t_values},
        "penalized_totals": {str(t): result.penalized_totals[t] for t in t_values},
    }
    report_dir = Path(config.report_dir)
    report_dir.mkdir(parents=True, exist_ok=True)
    _write_json(report_dir / "sweep.json", payload)
    return payload


# -- reproducibility -------------------------------------------------------------


def cmd_repro(config: PipelineConfig) -> dict:
    """Cross-grader, run-stability, and prompt-sensitivity reports.

    Sections whose inputs are missing (a single judge, a single run, a
    single rubric variant) are emitted as explicit skip notices rather than
    silently dropped.
    """
    all_records = store.read_records(config.store_dir)
    meta = report_meta(config)
    report_dir = Path(config.report_dir)
    report_dir.mkdir(parents=True, exist_ok=True)

    # Cross-grader consistency: pairwise over judges, run 0, standard prompt.
    judge_ids = [j.judge_id for j in config.judges]
    by_judge = {
        jid: [
            r for r in all_records
            if r.judge_id == jid and r.ocr_variant == "standard" and r.run_index == 0
        ]
        for jid in judge_ids
    }
    if len([j for j in judge_ids if by_judge[j]]) >= 2:
        pairs = []
        present = [j for j in judge_ids if by_judge[j]]
        for i in range(len(present)):
            for j in range(i + 1, len(present)):
                pairs.append(
                    analysis.cross_grader_report(by_judge[present[i]], by_judge[present[j]])
                )
        cross = {"meta": meta, "pairs": pairs}
    else:
        cross = {"meta": meta, "skipped": "fewer than two judges have records"}
    _write_json(report_dir / "cross_grader.json", cross)

    # Run-to-run stability: per model, primary judge, standard prompt.
    primary = primary_records(config, all_records)
    runs_present = sorted({r.run_index for r in primary})
    if len(runs_present) >= 2:
        stability = {}
        for model_id in sorted({r.model_id for r in primary}):
            runs = [
                [r for r in primary if r.model_id == model_id and r.run_index == k]
                for k in runs_present
            ]
            runs = [run for run in runs if run]
            if len(runs) >= 2:
                stability[model_id] = analysis.run_stability(runs)
        run_stab = {"meta": meta, "models": stability}
    else:
        run_stab = {"meta": meta, "skipped": "only one grading run is present"}
    _write_json(report_dir / "run_stability.json", run_stab)

    # Prompt sensitivity: records pooled by rubric variant.
    variants = sorted({r.rubric_variant for r in all_records if r.ocr_variant == "standard"})
    if len(variants) >= 2:
        by_variant = {
            v: [r for r in all_records
                if r.rubric_variant == v and r.ocr_variant == "standard" and r.run_index == 0]
            for v in variants
        }
        sensitivity = {"meta": meta, **analysis.prompt_sensitivity(by_variant)}
    else:
        sensitivity = {"meta": meta, "skipped": "only one rubric prompt variant is present"}
    _write_json(report_dir / "prompt_sensitivity.json", sensitivity)

    return {"cross_grader": cross, "run_stability": run_stab,
            "prompt_sensitivity": sensitivity}


# -- mitigation --------------------------------------------------------------------


def cmd_mitigate(config: PipelineConfig) -> dict:
    all_records = store.read_records(config.store_dir)
    original = primary_records(config, all_records, ocr_variant="standard")
    mitigated = primary_records(config, all_records, ocr_variant="mitigated")
    if not original:
        raise analysis.SampleSetMismatch("no records for prompt_variant='standard'")
    if not mitigated:
        raise analysis.SampleSetMismatch("no records for prompt_variant='mitigated'")
    payload = {"meta": report_meta(config), **analysis.mitigation_compare(original, mitigated)}
    report_dir = Path(config.report_dir)
    report_dir.mkdir(parents=True, exist_ok=True)
    _write_json(report_dir / "mitigation.json", payload)
    return payload


# -- discrepancy labeling -------------------------------------------------------------


def cmd_label(config: PipelineConfig, model_ids: list[str] | None = None) -> dict:
    corpus, tset = load_inputs(config)
    judge = make_judge(config.primary_judge, config.cache_dir)
    targets = model_ids or tset.model_ids
    per_model = {}
    all_labels = []
    failures = []
    for model_id in targets:
        labels = []
        for t in tset.for_model(model_id):
            gt = corpus.get(t.sample_id).gt_transcription
            try:
                labels.append(label_discrepancy(judge, gt, t.text))
            except JudgeError as exc:
                failures.append(
                    {"sample_id": t.sample_id, "model_id": model_id,
                     "error": type(exc).__name__, "message": str(exc)}
                )
        if labels:
            per_model[model_id] = analysis.discrepancy_breakdown(labels)
            all_labels.extend(labels)
    payload = {
        "meta": report_meta(config),
        "per_model": per_model,
        "overall": analysis.discrepancy_breakdown(all_labels),
        "n_failures": len(failures),
        "failures": failures,
    }
    report_dir = Path(config.report_dir)
    report_dir.mkdir(parents=True, exist_ok=True)
    _write_json(report_dir / "discrepancies.json", payload)
    return payload


__all__ = [
    "cmd_grade",
    "cmd_score",
    "cmd_sweep",
    "cmd_repro",
    "cmd_mitigate",
    "cmd_label",
    "load_inputs",
    "primary_records",
]
