"""Human-annotation protocol: task construction, blind A/B assignment,
and aggregation of the collected judgments.

Each annotation task shows one OCR output as a "student solution".  In
preference mode the task also shows two anonymized automated scores on a
common 0-10 scale; which metric sits on side A is decided by a keyed hash
of (deployment seed, rater, sample, model) and persisted before the task is
first shown, so a re-fetch can never re-randomize.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Iterable

from . import metrics
from .analysis import UnresolvedMapping
from .config import PipelineConfig
from .datamodel import EvalRecord
from .store import AnnotationStore

METRIC_A_CHOICES = ("PINK", "BLEU")
ANNOTATION_MODES = ("grade", "prefer")


@dataclass(frozen=True)
class Task:
    sample_id: str
    model_id: str
    problem_text: str
    reference_solution: str
    student_solution: str
    image_ref: str | None
    pink_display: float  # 0-10, one decimal
    bleu_display: float  # 0-10, one decimal
    model_total: int  # auto-grader total for the OCR output, 0-100

    @property
    def task_id(self) -> str:
        return f"{self.sample_id}::{self.model_id}"


def display_round(value: float) -> float:
    return round(max(0.0, min(10.0, value)), 1)


def build_tasks(config: PipelineConfig, corpus, tset, records: Iterable[EvalRecord]) -> list[Task]:
    """One task per standard-variant record of the primary judge, run 0."""
    judge_id = config.primary_judge.judge_id
    wanted_model = config.annotation.model_id
    tasks = []
    for rec in sorted(records, key=lambda r: (r.sample_id, r.model_id)):
        if rec.judge_id != judge_id or rec.run_index != 0 or rec.ocr_variant != "standard":
            continue
        if wanted_model and rec.model_id != wanted_model:
            continue
        sample = corpus.get(rec.sample_id)
        transcription = tset.get(rec.sample_id, rec.model_id, "standard")
        pink_item = (
            rec.penalized_total / rec.oracle.total if rec.oracle.total else 0.0
        )
        bleu_item = metrics.bleu([(sample.gt_transcription, transcription.text)])
        tasks.append(
            Task(
                sample_id=rec.sample_id,
                model_id=rec.model_id,
                problem_text=sample.problem_text,
                reference_solution=sample.reference_solution,
                student_solution=transcription.text,
                image_ref=sample.image_ref,
                pink_display=display_round(10 * pink_item),
                bleu_display=display_round(10 * bleu_item),
                model_total=rec.model.total,
            )
        )
    return tasks


def side_a_metric(seed: str, rater_id: str, sample_id: str, model_id: str) -> str:
    """Deterministic but audit-only fair coin for which metric is Score A."""
    digest = hashlib.sha256(
        f"{seed}:{rater_id}:{sample_id}:{model_id}".encode("utf-8")
    ).digest()
    return METRIC_A_CHOICES[digest[0] & 1]


def get_or_create_assignment(
    store: AnnotationStore, seed: str, rater_id: str, task: Task
) -> dict:
    """Return the persisted A/B mapping, creating and persisting it first
    if this (rater, sample, model) has never been shown."""
    existing = store.assignment_for(rater_id, task.sample_id, task.model_id)
    if existing is not None:
        return existing
    a = side_a_metric(seed, rater_id, task.sample_id, task.model_id)
    b = "BLEU" if a == "PINK" else "PINK"
    row = {
        "rater_id": rater_id,
        "sample_id": task.sample_id,
        "model_id": task.model_id,
        "side_a": a,
        "side_b": b,
    }
    store.append_assignment(row)
    return row


def scores_for_sides(task: Task, assignment: dict) -> tuple[float, float]:
    by_metric = {"PINK": task.pink_display, "BLEU": task.bleu_display}
    return by_metric[assignment["side_a"]], by_metric[assignment["side_b"]]


def annotated_keys(store: AnnotationStore, rater_id: str, mode: str) -> set[tuple[str, str]]:
    """(sample, model) pairs this rater has already handled in this mode."""
    kinds = {"grade": ("DirectGrade",), "prefer": ("Preference",)}[mode]
    done = set()
    for row in store.iter_annotations():
        if row.get("rater_id") != rater_id:
            continue
        if row["kind"] in kinds or (row["kind"] == "Skip" and row.get("mode") == mode):
            done.add((row["sample_id"], row["model_id"]))
    return done


def next_task(store: AnnotationStore, rater_id: str, mode: str, tasks: list[Task]) -> Task | None:
    done = annotated_keys(store, rater_id, mode)
    for task in tasks:
        if (task.sample_id, task.model_id) not in done:
            return task
    return None


def progress(store: AnnotationStore, rater_id: str, tasks: list[Task]) -> dict:
    out = {}
    for mode in ANNOTATION_MODES:
        done = annotated_keys(store, rater_id, mode)
        skipped = sum(
            1
            for row in store.iter_annotations()
            if row.get("rater_id") == rater_id
            and row["kind"] == "Skip"
            and row.get("mode") == mode
        )
        out[mode] = {
            "completed": len(done),
            "total": len(tasks),
            "skipped": skipped,
        }
    return out


def resolve_preferences(store: AnnotationStore) -> list[dict]:
    """Map recorded A/B choices back to metric identity via the persisted
    assignments.  Skips are excluded; a missing or inconsistent mapping is an
    UnresolvedMapping naming the row."""
    assignments = {}
    for row in store.iter_assignments():
        assignments[(row["rater_id"], row["sample_id"], row["model_id"])] = row
    resolved = []
    for i, row in enumerate(store.iter_annotations()):
        if row["kind"] != "Preference":
            continue
        key = (row["rater_id"], row["sample_id"], row["model_id"])
        mapping = assignments.get(key)
        if mapping is None:
            raise UnresolvedMapping(f"annotation row {i}: no persisted A/B mapping for {key}")
        chosen = row["chosen"]
        if chosen == "Neither":
            metric = "Neither"
        elif chosen == "A":
            metric = mapping["side_a"]
        elif chosen == "B":
            metric = mapping["side_b"]
        else:
            raise UnresolvedMapping(f"annotation row {i}: bad choice {chosen!r}")
        stored = row.get("resolved_metric")
        if stored is not None and stored != metric:
            raise UnresolvedMapping(
                f"annotation row {i}: stored resolution {stored!r} contradicts mapping"
            )
        resolved.append(
            {
                "rater_id": row["rater_id"],
                "sample_id": f"{row['sample_id']}::{row['model_id']}",
                "chosen": metric,
            }
        )
    return resolved


def agreement_inputs(
    store: AnnotationStore, tasks: list[Task]
) -> tuple[dict[str, dict[str, int]], dict[str, float]]:
    """DirectGrade rows as a rater x task matrix plus the auto totals."""
    human: dict[str, dict[str, int]] = {}
    for row in store.iter_annotations():
        if row["kind"] != "DirectGrade":
            continue
        key = f"{row['sample_id']}::{row['model_id']}"
        human.setdefault(row["rater_id"], {})[key] = int(row["grade"])
    auto = {task.task_id: float(task.model_total) for task in tasks}
    return human, auto
