"""HTTP service backing the annotation UI.

JSON API:
  GET  /api/tasks/next?rater=...&mode=grade|prefer
  POST /api/annotations
  GET  /api/progress?rater=...
  GET  /api/stats
Static UI bundle at /.

The A/B metric mapping for a preference task is persisted before the task
is returned; annotators only ever see "Score A" / "Score B".  Annotation
appends are serialized through the store's single writer lock; everything
else is read-only.
"""

from __future__ import annotations

import datetime
import logging
from pathlib import Path

from fastapi import Body, FastAPI, HTTPException, Query
from fastapi.responses import HTMLResponse
from fastapi.staticfiles import StaticFiles

from . import analysis, annotation, pipeline, store
from .config import PipelineConfig

log = logging.getLogger(__name__)

_FALLBACK_PAGE = """<!doctype html>
<html><head><title>annotation service</title></head>
<body><h1>Annotation service is running</h1>
<p>No UI bundle is configured. Point annotation.ui_dir at a built frontend,
or use the JSON API under /api/.</p></body></html>
"""


def _timestamp() -> str:
    return datetime.datetime.now(datetime.timezone.utc).isoformat()


def create_app(config: PipelineConfig) -> FastAPI:
    corpus, tset = pipeline.load_inputs(config)
    records = store.read_records(config.store_dir)
    tasks = annotation.build_tasks(config, corpus, tset, records)
    if not tasks:
        raise store.MissingStore("no records available to build annotation tasks")
    ann_store = store.AnnotationStore(Path(config.annotation_dir))
    seed = config.annotation.seed
    task_index = {(t.sample_id, t.model_id): t for t in tasks}

    app = FastAPI(title="pink annotation service")

    @app.get("/api/tasks/next")
    def tasks_next(rater: str = Query(...), mode: str = Query(...)):
        if mode not in annotation.ANNOTATION_MODES:
            raise HTTPException(422, f"mode must be one of {annotation.ANNOTATION_MODES}")
        task = annotation.next_task(ann_store, rater, mode, tasks)
        prog = annotation.progress(ann_store, rater, tasks)
        if task is None:
            return {"done": True, "task": None, "progress": prog}
        view = {
            "task_id": task.task_id,
            "sample_id": task.sample_id,
            "model_id": task.model_id,
            "mode": mode,
            "problem_text": task.problem_text,
            "reference_solution": task.reference_solution,
            "student_solution": task.student_solution,
            "image_ref": task.image_ref,
        }
        if mode == "prefer":
            assignment = annotation.get_or_create_assignment(ann_store, seed, rater, task)
            score_a, score_b = annotation.scores_for_sides(task, assignment)
            view["score_a"] = score_a
            view["score_b"] = score_b
        return {"done": False, "task": view, "progress": prog}

    @app.post("/api/annotations")
    def post_annotation(payload: dict = Body(...)):
        kind = payload.get("kind")
        if kind not in ("DirectGrade", "Preference", "Skip"):
            raise HTTPException(422, f"unknown annotation kind {kind!r}")
        for field in ("rater_id", "sample_id", "model_id"):
            if not payload.get(field):
                raise HTTPException(422, f"missing field {field!r}")
        key = (payload["sample_id"], payload["model_id"])
        if key not in task_index:
            raise HTTPException(422, f"unknown task {key}")
        rater = payload["rater_id"]

        row = {
            "kind": kind,
            "rater_id": rater,
            "sample_id": payload["sample_id"],
            "model_id": payload["model_id"],
            "ui_session_id": payload.get("ui_session_id", ""),
            "timestamp": _timestamp(),
        }
        if kind == "DirectGrade":
            grade = payload.get("grade")
            if not isinstance(grade, int) or isinstance(grade, bool) or not 0 <= grade <= 10:
                raise HTTPException(422, f"grade must be an integer in [0, 10], got {grade!r}")
            row["grade"] = grade
            mode = "grade"
        elif kind == "Preference":
            chosen = payload.get("chosen")
            if chosen not in ("A", "B", "Neither"):
                raise HTTPException(422, f"chosen must be A, B, or Neither, got {chosen!r}")
            assignment = ann_store.assignment_for(rater, *key)
            if assignment is None:
                raise HTTPException(409, "no persisted A/B mapping; fetch the task first")
            row["shown_a"] = assignment["side_a"]
            row["shown_b"] = assignment["side_b"]
            row["chosen"] = chosen
            row["resolved_metric"] = (
                "Neither" if chosen == "Neither" else assignment[f"side_{chosen.lower()}"]
            )
            mode = "prefer"
        else:
            mode = payload.get("mode")
            if mode not in annotation.ANNOTATION_MODES:
                raise HTTPException(422, f"skip needs a valid mode, got {mode!r}")
            row["mode"] = mode

        # Idempotent on (rater, sample, model, mode): a re-submit is a no-op.
        already = annotation.annotated_keys(ann_store, rater, mode)
        if key in already:
            return {"ok": True, "duplicate": True}
        ann_store.append_annotation(row)
        return {"ok": True, "duplicate": False}

    @app.get("/api/progress")
    def get_progress(rater: str = Query(...)):
        return annotation.progress(ann_store, rater, tasks)

    @app.get("/api/stats")
    def get_stats():
        out: dict = {"n_tasks": len(tasks)}
        human, auto = annotation.agreement_inputs(ann_store, tasks)
        try:
            out["human_agreement"] = analysis.human_agreement(human, auto)
        except analysis.AnalysisError as exc:
            out["human_agreement"] = {"skipped": str(exc)}
        prefs = annotation.resolve_preferences(ann_store)
        pink_scores = {t.task_id: t.pink_display for t in tasks}
        out["preferences"] = analysis.preference_aggregate(
            prefs, pink_scores, config.annotation.bracket_edges
        )
        return out

    if any(t.image_ref for t in tasks):
        app.mount(
            "/corpus-files",
            StaticFiles(directory=str(Path(config.corpus).parent)),
            name="corpus-files",
        )

    ui_dir = config.annotation.ui_dir
    if ui_dir and Path(ui_dir).is_dir():
        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")
    else:
        @app.get("/", response_class=HTMLResponse)
        def index():
            return _FALLBACK_PAGE

    setattr(app.state, "n_tasks", len(tasks))
    return app


def serve(config: PipelineConfig, host: str = "127.0.0.1", port: int = 8321) -> None:
    import uvicorn

    app = create_app(config)
    log.info("annotation service on http://%s:%d (%d tasks)", host, port,
             app.state.n_tasks)
    uvicorn.run(app, host=host, port=port, log_level="info")
