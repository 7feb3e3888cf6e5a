#!/usr/bin/env python3
"""Regenerate the bundled mini-benchmark under src/pink/data/mini/.

The mini benchmark is 12 samples (2 clean controls) x 3 synthetic OCR
models with planted behaviors:

  verbatim-ocr  copies the ground truth exactly (fully faithful),
  helpful-ocr   silently fixes student errors (aggressive over-corrector),
  noisy-ocr     keeps errors but mangles formatting (BLEU-hostile).

The mock judge fixture assigns every (problem, reference, candidate) triple
a fixed rubric vector, keyed by content hash.  Run this script after editing
any text or score below; the emitted files are committed.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from pink.judge import content_hash  # noqa: E402

OUT_DIR = Path(__file__).resolve().parent.parent / "src" / "pink" / "data" / "mini"

# sample_id -> (problem, reference_solution, gt_transcription, tag, is_clean)
SAMPLES = {
    "s01": (
        "Solve for x: 2x + 3 = 11.",
        "2x + 3 = 11\n2x = 11 - 3\n2x = 8\nx = 8 / 2\nx = 4",
        "2x + 3 = 11\n2x = 11 - 3\n2x = 8\nx = 8 / 2\nx = 5",
        "computational",
        False,
    ),
    "s02": (
        "Differentiate f(x) = x^3 + 2x.",
        "By the power rule:\nf'(x) = 3x^2 + 2",
        "By the power rule:\nf'(x) = 3x^2 + 2x",
        "conceptual",
        False,
    ),
    "s03": (
        "Evaluate \\int_0^1 2x \\, dx.",
        "\\int_0^1 2x \\, dx = [x^2]_0^1\n= 1^2 - 0^2\n= 1",
        "\\int_0^1 2x \\, dx = [x^2]_0^1\n= 1^2 - 0^2\n= 2",
        "computational",
        False,
    ),
    "s04": (
        "Solve x^2 - 5x + 6 = 0.",
        "x^2 - 5x + 6 = 0\n(x - 2)(x - 3) = 0\nx = 2 or x = 3",
        "x^2 - 5x + 6 = 0\n(x - 2)(x - 3) = 0\nx = -2 or x = -3",
        "notational",
        False,
    ),
    "s05": (
        "Evaluate \\int \\frac{dx}{1 + x^2}.",
        "\\int \\frac{dx}{1 + x^2} = \\tan^{-1} x + C",
        "\\int \\frac{dx}{1 + x^2} = \\sin^{-1} x + C",
        "conceptual",
        False,
    ),
    "s06": (
        "Solve the system: x + y = 6 and x - y = 2.",
        "Adding the equations: 2x = 8, so x = 4.\nThen y = 6 - x = 2.",
        "Adding the equations: 2x = 8, so x = 4.\nThen y = 6 + x = 10.",
        "conceptual",
        False,
    ),
    "s07": (
        "Find the area of a triangle with base 6 and height 4.",
        "A = \\frac{1}{2} b h\nA = \\frac{1}{2} (6)(4)\nA = 12",
        "A = \\frac{1}{2} (6)(4)\nA = \\frac{1}{2} b h\nA = 12",
        "presentation",
        False,
    ),
    "s08": (
        "Solve 2^x = 16.",
        "2^x = 16 = 2^4\nx = 4",
        "2^x = 16\nx = 8",
        "computational",
        False,
    ),
    "s09": (
        "A rectangle is 3 cm by 4 cm. Find its area.",
        "A = 3 \\times 4 = 12 \\text{ cm}^2",
        "A = 3 \\times 4 = 12 cm2",
        "superficial",
        False,
    ),
    "s10": (
        "Simplify \\frac{x^2 - 1}{x - 1}.",
        "\\frac{x^2 - 1}{x - 1} = \\frac{(x - 1)(x + 1)}{x - 1}\n= x + 1",
        "\\frac{x^2 - 1}{x - 1} = \\frac{(x - 1)(x + 1)}{x - 1}\n= x - 1",
        "computational",
        False,
    ),
    "s11": (
        "Compute 3 + 4 \\times 2.",
        "4 \\times 2 = 8\n3 + 8 = 11",
        "4 \\times 2 = 8\n3 + 8 = 11",
        None,
        True,
    ),
    "s12": (
        "Differentiate g(x) = x^2.",
        "g'(x) = 2x",
        "g'(x) = 2x",
        None,
        True,
    ),
}

# Oracle rubric vectors for the ground-truth transcriptions.
ORACLE_SCORES = {
    "s01": (20, 20, 20, 5, 5),
    "s02": (20, 15, 10, 5, 5),
    "s03": (20, 15, 10, 5, 5),
    "s04": (20, 20, 15, 10, 5),
    "s05": (20, 15, 10, 5, 5),
    "s06": (15, 10, 10, 5, 5),
    "s07": (20, 20, 20, 15, 15),
    "s08": (15, 10, 10, 5, 5),
    "s09": (20, 20, 20, 20, 15),
    "s10": (20, 15, 15, 10, 5),
    "s11": (20, 20, 20, 20, 15),
    "s12": (20, 20, 20, 20, 20),
}

# helpful-ocr rewrites these samples to the corrected working (reference
# text) and is graded perfect on them; elsewhere it transcribes faithfully.
HELPFUL_FIXED = ("s01", "s02", "s03", "s04", "s05", "s06", "s08", "s10")
HELPFUL_SCORES = {sid: (20, 20, 20, 20, 20) for sid in HELPFUL_FIXED}

# noisy-ocr keeps the student errors but garbles formatting; the judge
# docks a few points for lost content and over-credits slightly on three
# samples (minor over-corrections under the default threshold).
NOISY_TEXTS = {
    "s01": "2x+3=11\n2 x = 11-3\n2x= 8\nx = 8/2\nx = 5",
    "s02": "By the pover rule :\nf'(x)=3x^2+2x",
    "s03": "\\int_0^1 2x dx = [ x^2 ]_0^1\n= 2",
    "s04": "x^2-5x+6 = 0\n(x-2)(x-3)=0\nx = -2 or x = -3",
    "s05": "\\int dx/(1+x^2) = \\sin^{-1} x",
    "s06": "Addng the equations : 2x=8 , so x=4 .\nThen y = 6+x = 10 .",
    "s07": "A = 1/2 (6)(4)\nA = 1/2 b h\nA = 12",
    "s08": "2 ^ x = 16\nx = 8",
    "s09": "A = 3 x 4 = 12 cm2",
    "s10": "(x^2-1)/(x-1) = ((x-1)(x+1))/(x-1)\n= x - 1",
    "s11": "4 x 2 = 8\n3+8 = 11",
    "s12": "g'(x) = 2 x",
}
NOISY_SCORES = {
    "s01": (20, 20, 15, 5, 5),
    "s02": (20, 15, 10, 5, 0),
    "s03": (20, 15, 5, 5, 5),
    "s04": (20, 20, 15, 5, 5),
    "s05": (20, 15, 10, 5, 8),
    "s06": (15, 10, 5, 5, 5),
    "s07": (20, 20, 15, 15, 15),
    "s08": (15, 10, 10, 5, 8),
    "s09": (20, 20, 20, 15, 15),
    "s10": (20, 17, 15, 10, 5),
    "s11": (20, 20, 20, 15, 15),
    "s12": (20, 20, 20, 20, 15),
}

NOISY_LABELS = {
    "s01": "formatting_only",
    "s02": "includes_formatting",
    "s03": "includes_formatting",
    "s04": "formatting_only",
    "s05": "includes_formatting",
    "s06": "includes_formatting",
    "s07": "formatting_only",
    "s08": "formatting_only",
    "s09": "formatting_only",
    "s10": "formatting_only",
    "s11": "formatting_only",
    "s12": "formatting_only",
}

# Standalone hand-labeled pairs exercised by the labeling tests.
EXTRA_LABEL_PAIRS = [
    ("\\frac{1}{2}", "0.5", "formatting_only"),
    ("x^{2} + 1", "x^2 + 1", "formatting_only"),
    ("y = 2x", "y = 3x", "semantic_only"),
    ("\\sin^{-1} y", "\\arcsin y", "formatting_only"),
    ("area = 12 cm^2", "area = 12 m^2", "semantic_only"),
]


def justification(score: int) -> str:
    if score == 20:
        return "fully correct"
    if score >= 15:
        return "minor slip"
    if score >= 10:
        return "partial credit"
    if score >= 5:
        return "major issue"
    return "missing or wrong"


def model_text(model_id: str, sid: str) -> str:
    problem, reference, gt, _, _ = SAMPLES[sid]
    if model_id == "verbatim-ocr":
        return gt
    if model_id == "helpful-ocr":
        return reference if sid in HELPFUL_FIXED else gt
    if model_id == "noisy-ocr":
        return NOISY_TEXTS[sid]
    raise KeyError(model_id)


def main() -> None:
    OUT_DIR.mkdir(parents=True, exist_ok=True)

    corpus_lines = []
    for sid, (problem, reference, gt, tag, clean) in SAMPLES.items():
        rec = {
            "sample_id": sid,
            "problem_id": f"p{sid[1:]}",
            "problem_text": problem,
            "reference_solution": reference,
            "gt_transcription": gt,
            "is_clean": clean,
        }
        if tag:
            rec["perturbation_tag"] = tag
        corpus_lines.append(json.dumps(rec, ensure_ascii=False))
    (OUT_DIR / "corpus.jsonl").write_text("\n".join(corpus_lines) + "\n", encoding="utf-8")

    models = ("helpful-ocr", "noisy-ocr", "verbatim-ocr")
    transcription_lines = []
    for model_id in models:
        for sid in SAMPLES:
            transcription_lines.append(
                json.dumps(
                    {
                        "sample_id": sid,
                        "model_id": model_id,
                        "prompt_variant": "standard",
                        "text": model_text(model_id, sid),
                    },
                    ensure_ascii=False,
                )
            )
    (OUT_DIR / "transcriptions.jsonl").write_text(
        "\n".join(transcription_lines) + "\n", encoding="utf-8"
    )

    grades: dict[str, dict] = {}
    labels: dict[str, str] = {}

    def add_grade(sid: str, candidate: str, scores) -> None:
        problem, reference, _, _, _ = SAMPLES[sid]
        key = content_hash(problem, reference, candidate)
        entry = {
            "components": list(scores),
            "justifications": [justification(s) for s in scores],
        }
        if key in grades and grades[key] != entry:
            raise SystemExit(f"conflicting grade fixture for {sid}")
        grades[key] = entry

    for sid, (problem, reference, gt, _, _) in SAMPLES.items():
        add_grade(sid, gt, ORACLE_SCORES[sid])
        for model_id in models:
            text = model_text(model_id, sid)
            if text == gt:
                continue  # shares the oracle grading, by content address
            scores = HELPFUL_SCORES[sid] if model_id == "helpful-ocr" else NOISY_SCORES[sid]
            add_grade(sid, text, scores)

    for sid, (_, _, gt, _, _) in SAMPLES.items():
        labels[content_hash(gt, gt)] = "no_discrepancy"
        helpful = model_text("helpful-ocr", sid)
        if helpful != gt:
            labels[content_hash(gt, helpful)] = "semantic_only"
        labels[content_hash(gt, NOISY_TEXTS[sid])] = NOISY_LABELS[sid]
    for gt, ocr, label in EXTRA_LABEL_PAIRS:
        labels[content_hash(gt, ocr)] = label

    fixture = {"grades": grades, "labels": labels}
    (OUT_DIR / "judge_fixture.json").write_text(
        json.dumps(fixture, ensure_ascii=False, indent=1, sort_keys=True) + "\n",
        encoding="utf-8",
    )
    print(f"wrote {len(SAMPLES)} samples, {len(transcription_lines)} transcriptions, "
          f"{len(grades)} grade fixtures, {len(labels)} label fixtures -> {OUT_DIR}")


if __name__ == "__main__":
    main()
