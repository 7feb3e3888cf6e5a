"""Prompt templates for grading, discrepancy labeling, and OCR fetching.

Prompt construction is deterministic: identical inputs produce byte-identical
prompts.  Rubric prompt variants differ from the original only by the phrase
substitutions in VARIANT_SUBSTITUTIONS, so run-to-run and prompt-sensitivity
studies have a precisely bounded diff.
"""

from __future__ import annotations

from .datamodel import component_names

RUBRIC_DESCRIPTIONS = {
    "formula_identification": "the governing formulas, identities, and problem setup are correctly identified",
    "boundary_conditions": "constraints, domains, units, and initial or boundary conditions are handled",
    "calc_early": "algebraic and numeric accuracy of the early solution steps",
    "calc_late": "accuracy of the later steps that carry the work to a result",
    "final_answer": "the final value is stated, checked, and given in the required form",
}

# variant name -> list of (original phrase, replacement) applied to the
# original grading prompt.  Anything else is identical across variants.
VARIANT_SUBSTITUTIONS: dict[str, list[tuple[str, str]]] = {
    "original": [],
    "v1": [("character by character", "line by line")],
    "v2": [("a strict university mathematics examiner", "a meticulous mathematics exam grader")],
    "v3": [
        ("Grade only what is literally on the page", "Score strictly the content that is actually written"),
        ("character by character", "symbol by symbol"),
    ],
}

_GRADING_TEMPLATE = """You are a strict university mathematics examiner. Read the student's solution transcript character by character and grade it against the reference solution.

## Problem
{problem}

## Reference solution
{reference}

## Student solution transcript
{candidate}

## Rubric
Score each component from 0 to {component_max} points:
{rubric_lines}

Grade only what is literally on the page: preserve credit lost to any student error, and never award credit for steps the transcript does not contain.

After any reasoning you need, end your reply with a fenced code block containing exactly {r} lines, one per rubric component, in this order and format:

```
{format_lines}
```

Each score must be an integer between 0 and {component_max}.
"""

_FORMAT_LINE = "{name}: <score>/{component_max} - <one-line justification>"

LABELING_TEMPLATE = """You compare a ground-truth transcript of handwritten mathematics against an OCR system's output and classify their discrepancy.

## Ground-truth transcript
{gt}

## OCR output
{ocr}

Choose exactly one label:
- no_discrepancy: the two texts convey identical content in identical form.
- formatting_only: every difference is cosmetic markup or notation (for example \\frac{{1}}{{2}} versus 0.5, spacing, equivalent LaTeX commands) with no change in mathematical meaning.
- includes_formatting: there are formatting differences and at least one change in mathematical content.
- semantic_only: the mathematical content differs but the formatting conventions match.

End your reply with a fenced code block containing exactly one line:

```
label: <one of no_discrepancy, formatting_only, includes_formatting, semantic_only>
```
"""

OCR_TEMPLATE = """Transcribe the handwritten mathematics in the attached image into LaTeX, keeping the original line structure. Output only the transcription with no commentary.
"""

OCR_MITIGATED_TEMPLATE = """Transcribe the handwritten mathematics in the attached image into LaTeX, keeping the original line structure. Copy the handwriting exactly as it appears: preserve every student error, omission, and idiosyncrasy, and do not correct, complete, or improve anything. Output only the transcription with no commentary.
"""

LABEL_VALUES = (
    "no_discrepancy",
    "formatting_only",
    "includes_formatting",
    "semantic_only",
)

LABEL_TO_ENUM = {
    "no_discrepancy": "NoDiscrepancy",
    "formatting_only": "FormattingOnly",
    "includes_formatting": "IncludesFormatting",
    "semantic_only": "SemanticOnly",
}


def build_grading_prompt(
    problem_text: str,
    reference_solution: str,
    candidate_text: str,
    rubric_prompt_variant: str = "original",
    r: int = 5,
    component_max: int = 20,
) -> str:
    """Render the grading prompt for one candidate under one rubric variant."""
    for name, value in (
        ("problem_text", problem_text),
        ("reference_solution", reference_solution),
        ("candidate_text", candidate_text),
    ):
        if not value.strip():
            raise ValueError(f"{name} must be non-empty")
    if rubric_prompt_variant not in VARIANT_SUBSTITUTIONS:
        raise ValueError(f"unknown rubric prompt variant {rubric_prompt_variant!r}")

    names = component_names(r)
    rubric_lines = "\n".join(
        f"{i + 1}. {name}: {RUBRIC_DESCRIPTIONS.get(name, 'component quality')}"
        for i, name in enumerate(names)
    )
    format_lines = "\n".join(
        _FORMAT_LINE.format(name=name, component_max=component_max) for name in names
    )
    prompt = _GRADING_TEMPLATE.format(
        problem=problem_text,
        reference=reference_solution,
        candidate=candidate_text,
        rubric_lines=rubric_lines,
        format_lines=format_lines,
        r=r,
        component_max=component_max,
    )
    for original, replacement in VARIANT_SUBSTITUTIONS[rubric_prompt_variant]:
        prompt = prompt.replace(original, replacement)
    return prompt


def build_labeling_prompt(gt_transcription: str, ocr_text: str) -> str:
    return LABELING_TEMPLATE.format(gt=gt_transcription, ocr=ocr_text)


def build_ocr_prompt(mitigated: bool = False) -> str:
    return OCR_MITIGATED_TEMPLATE if mitigated else OCR_TEMPLATE


FORMAT_REMINDER = (
    "Your previous reply did not match the required format. Reply again, ending "
    "with a fenced code block of exactly {r} lines in the form "
    "\"<component_name>: <integer score>/{component_max} - <justification>\" "
    "using the component names and order given before."
)
