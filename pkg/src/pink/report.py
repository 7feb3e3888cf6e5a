"""The `pink report` path: regenerate the bundle, render figures, and
optionally emit a human-readable markdown summary.

Data reports (JSON + CSV) are the source of truth; figures and markdown are
derived from them so the whole bundle stays internally consistent.
"""

from __future__ import annotations

import json
import logging
from pathlib import Path

from . import analysis, annotation, figures, pipeline, store
from .config import PipelineConfig

log = logging.getLogger(__name__)


def _load_json(path: Path) -> dict | None:
    if not path.exists():
        return None
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def write_annotation_reports(config: PipelineConfig) -> list[Path]:
    """human_agreement.json and preferences.json from the annotation log."""
    ann_dir = Path(config.annotation_dir)
    written: list[Path] = []
    if not (ann_dir / "annotations.jsonl").exists():
        return written
    corpus, tset = pipeline.load_inputs(config)
    records = store.read_records(config.store_dir)
    tasks = annotation.build_tasks(config, corpus, tset, records)
    ann_store = store.AnnotationStore(ann_dir)
    report_dir = Path(config.report_dir)
    report_dir.mkdir(parents=True, exist_ok=True)
    meta = pipeline.report_meta(config)

    human, auto = annotation.agreement_inputs(ann_store, tasks)
    try:
        agreement = {"meta": meta, **analysis.human_agreement(human, auto)}
    except analysis.AnalysisError as exc:
        agreement = {"meta": meta, "skipped": str(exc)}
    path = report_dir / "human_agreement.json"
    pipeline._write_json(path, agreement)
    written.append(path)

    prefs = annotation.resolve_preferences(ann_store)
    pink_scores = {t.task_id: t.pink_display for t in tasks}
    preferences = {
        "meta": meta,
        **analysis.preference_aggregate(prefs, pink_scores, config.annotation.bracket_edges),
    }
    path = report_dir / "preferences.json"
    pipeline._write_json(path, preferences)
    written.append(path)
    return written


def render_figures(report_dir: Path) -> list[Path]:
    """PNG renderings for every report section present in the bundle."""
    fig_dir = report_dir / "figures"
    written: list[Path] = []

    leaderboard = _load_json(report_dir / "leaderboard.json")
    if leaderboard:
        written.append(figures.fig_leaderboard(leaderboard, fig_dir / "leaderboard.png"))
        written.append(figures.fig_oc_rates(leaderboard, fig_dir / "oc_rates.png"))
        written.append(figures.fig_oc_magnitudes(leaderboard, fig_dir / "oc_magnitudes.png"))

    rank_deltas = _load_json(report_dir / "rank_deltas.json")
    if rank_deltas:
        written.append(
            figures.fig_ranking_reversal(rank_deltas, fig_dir / "ranking_reversal.png")
        )

    heatmap = _csv_heatmap(report_dir / "heatmap.csv")
    if heatmap:
        written.append(figures.fig_heatmap(heatmap, fig_dir / "heatmap.png"))

    delta_hist = _csv_delta_hist(report_dir / "delta_hist.csv")
    if delta_hist:
        written.append(
            figures.fig_delta_distribution(delta_hist, fig_dir / "delta_distribution.png")
        )

    scatter = _csv_scatter(report_dir / "scatter.csv")
    if scatter:
        written.append(figures.fig_penalty_scatter(scatter, fig_dir / "penalty_scatter.png"))

    sweep = _load_json(report_dir / "sweep.json")
    if sweep:
        written.append(figures.fig_threshold_sweep(sweep, fig_dir / "threshold_sweep.png"))

    mitigation = _load_json(report_dir / "mitigation.json")
    if mitigation and "rows" in mitigation:
        written.append(figures.fig_mitigation(mitigation, fig_dir / "mitigation.png"))

    preferences = _load_json(report_dir / "preferences.json")
    if preferences and "overall" in preferences:
        written.append(figures.fig_preferences(preferences, fig_dir / "preferences.png"))

    return written


def _csv_rows(path: Path) -> list[dict] | None:
    import csv

    if not path.exists():
        return None
    with open(path, encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def _csv_heatmap(path: Path) -> dict | None:
    rows = _csv_rows(path)
    if not rows:
        return None
    components = [c for c in rows[0] if c != "model_id"]
    return {
        "components": components,
        "rows": [
            {"model_id": r["model_id"], "counts": [int(r[c]) for c in components]}
            for r in rows
        ],
    }


def _csv_delta_hist(path: Path) -> dict | None:
    rows = _csv_rows(path)
    if not rows:
        return None
    bins: list[str] = []
    for r in rows:
        if r["bin"] not in bins:
            bins.append(r["bin"])
    by_model: dict[str, dict[str, int]] = {}
    for r in rows:
        by_model.setdefault(r["model_id"], {})[r["bin"]] = int(r["count"])
    return {
        "bins": bins,
        "rows": [
            {"model_id": m, "counts": [counts.get(b, 0) for b in bins]}
            for m, counts in by_model.items()
        ],
    }


def _csv_scatter(path: Path) -> dict | None:
    rows = _csv_rows(path)
    if not rows:
        return None
    by_model: dict[str, list[dict]] = {}
    for r in rows:
        by_model.setdefault(r["model_id"], []).append(
            {
                "sample_id": r["sample_id"],
                "pre": int(r["pre_penalty_total"]),
                "post": int(r["post_penalty_total"]),
            }
        )
    return {"rows": [{"model_id": m, "points": pts} for m, pts in by_model.items()]}


def render_markdown(report_dir: Path) -> Path:
    """Compact report.md built from whichever sections exist."""
    lines: list[str] = ["# Evaluation report", ""]

    leaderboard = _load_json(report_dir / "leaderboard.json")
    if leaderboard:
        lines += ["## Leaderboard", ""]
        lines.append(
            "| rank | model | PINK | BLEU | edit dist | OC rate | BLEU rank | raw rank |"
        )
        lines.append("|---|---|---|---|---|---|---|---|")
        for e in leaderboard["entries"]:
            lines.append(
                f"| {e['rank_pink']} | {e['model_id']} | {e['pink']:.4f} "
                f"| {e['bleu']:.4f} | {e['norm_edit_distance']:.4f} "
                f"| {100 * e['oc_rate']:.1f}% | {e['rank_bleu']} | {e['rank_raw']} |"
            )
        lines.append("")

    sweep = _load_json(report_dir / "sweep.json")
    if sweep:
        lines += ["## Threshold sweep", "",
                  "| T | Kendall tau vs T=10 | ranking (best first) |", "|---|---|---|"]
        for t in sweep["thresholds"]:
            lines.append(
                f"| {t} | {sweep['tau_vs_baseline'][str(t)]:.4f} "
                f"| {', '.join(sweep['rankings'][str(t)])} |"
            )
        lines.append("")

    mitigation = _load_json(report_dir / "mitigation.json")
    if mitigation and "rows" in mitigation:
        lines += ["## Mitigated OCR prompt", "",
                  "| model | PINK std | PINK mit | dPINK | OC std | OC mit | dOC (pp) |",
                  "|---|---|---|---|---|---|---|"]
        for r in mitigation["rows"]:
            lines.append(
                f"| {r['model_id']} | {r['pink_original']:.3f} | {r['pink_mitigated']:.3f} "
                f"| {r['pink_delta']:+.3f} | {r['oc_original_pct']:.0f}% "
                f"| {r['oc_mitigated_pct']:.0f}% | {r['oc_delta_pp']:+.1f} |"
            )
        avg = mitigation["averages"]
        lines.append(
            f"| **mean** |  |  | {avg['pink_delta']:+.3f} |  |  | {avg['oc_delta_pp']:+.1f} |"
        )
        lines.append("")

    agreement = _load_json(report_dir / "human_agreement.json")
    if agreement and "skipped" not in agreement:
        lines += ["## Human agreement", ""]
        lines.append(
            f"- mean pairwise weighted kappa ({agreement['kappa_weighting']}): "
            f"{agreement['mean_pairwise_kappa']:.3f}"
        )
        lines.append(
            f"- Pearson r, mean human grade vs auto grade / 10: "
            f"{agreement['pearson_mean_human_vs_auto']:.3f}"
        )
        lines.append("")

    preferences = _load_json(report_dir / "preferences.json")
    if preferences and preferences.get("n"):
        o = preferences["overall"]
        lines += ["## Blind metric preference", ""]
        lines.append(
            f"- over {preferences['n']} votes: PINK {o['PINK']:.1f}%, "
            f"BLEU {o['BLEU']:.1f}%, neither {o['Neither']:.1f}%"
        )
        lines.append("")

    discrepancies = _load_json(report_dir / "discrepancies.json")
    if discrepancies:
        overall = discrepancies["overall"]
        lines += ["## Discrepancy labels", ""]
        lines.append(f"- pairs labeled: {overall['n_pairs']} ({overall['n_discrepant']} discrepant)")
        if overall["n_discrepant"]:
            lines.append(
                f"- formatting involved in {overall['formatting_involved_pct']:.1f}% of discrepancies"
            )
        lines.append("")

    figures_dir = report_dir / "figures"
    if figures_dir.is_dir():
        pngs = sorted(p.name for p in figures_dir.glob("*.png"))
        if pngs:
            lines += ["## Figures", ""]
            lines += [f"![{p}](figures/{p})" for p in pngs]
            lines.append("")

    path = report_dir / "report.md"
    path.write_text("\n".join(lines), encoding="utf-8")
    return path


def cmd_report(config: PipelineConfig, markdown: bool = False, figures: bool = True) -> list[Path]:
    """Re-render everything derivable from the record store and logs."""
    written: list[Path] = []
    pipeline.cmd_score(config)
    report_dir = Path(config.report_dir)
    written.append(report_dir / "leaderboard.json")
    written.extend(write_annotation_reports(config))
    if figures:
        written.extend(render_figures(report_dir))
    if markdown:
        written.append(render_markdown(report_dir))
    return written
