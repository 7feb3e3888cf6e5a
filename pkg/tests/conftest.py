"""Shared test helpers."""

from pink.datamodel import EvalRecord, RubricScore
from pink.penalty import PenaltyConfig, classify, penalize_item


def make_record(
    model_components,
    oracle_components,
    sample_id="s",
    model_id="m",
    judge_id="j",
    run_index=0,
    threshold=10,
    ocr_variant="standard",
    rubric_variant="original",
):
    """Build a self-consistent EvalRecord from raw component vectors."""
    model = RubricScore(tuple(model_components))
    oracle = RubricScore(tuple(oracle_components))
    cfg = PenaltyConfig(threshold=threshold)
    vec, total, _ = penalize_item(model, oracle, cfg)
    deltas = tuple(m - o for m, o in zip(model.components, oracle.components))
    return EvalRecord(
        sample_id=sample_id,
        model_id=model_id,
        judge_id=judge_id,
        run_index=run_index,
        oracle=oracle,
        model=model,
        deltas=deltas,
        classifications=tuple(classify(d, cfg) for d in deltas),
        penalized=vec,
        penalized_total=total,
        threshold_used=threshold,
        ocr_variant=ocr_variant,
        rubric_variant=rubric_variant,
    )
