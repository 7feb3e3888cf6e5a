"""Domain types and on-disk corpus / transcription loading.

The corpus and transcription files are UTF-8, LF-terminated, one JSON object
per line.  Corpus record fields: sample_id, problem_id, problem_text,
reference_solution, gt_transcription, image_ref (optional), perturbation_tag
(optional), is_clean (optional, defaults false).  Transcription record
fields: sample_id, model_id, prompt_variant, text.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Mapping

DEFAULT_R = 5
DEFAULT_COMPONENT_MAX = 20

# Fixed corpus-wide component order; events reference components by index
# and by these canonical names.
COMPONENT_NAMES = (
    "formula_identification",
    "boundary_conditions",
    "calc_early",
    "calc_late",
    "final_answer",
)

CLASSIFICATION_NAMES = ("NoEvent", "Minor", "Major")

PROMPT_VARIANTS = ("standard", "mitigated")


class DataError(Exception):
    """Base class for corpus / transcription / score validation failures."""


class MissingField(DataError):
    def __init__(self, field_name: str, line: int):
        super().__init__(f"line {line}: missing required field {field_name!r}")
        self.field_name = field_name
        self.line = line


class DuplicateSampleId(DataError):
    def __init__(self, sample_id: str, line: int):
        super().__init__(f"line {line}: duplicate sample_id {sample_id!r}")
        self.sample_id = sample_id
        self.line = line


class EmptyTranscription(DataError):
    def __init__(self, sample_id: str, line: int):
        super().__init__(f"line {line}: empty gt_transcription for {sample_id!r}")
        self.sample_id = sample_id
        self.line = line


class UnresolvableImageRef(DataError):
    def __init__(self, image_ref: str, line: int):
        super().__init__(f"line {line}: image_ref {image_ref!r} does not resolve")
        self.image_ref = image_ref
        self.line = line


class UnknownSampleId(DataError):
    def __init__(self, sample_id: str, line: int):
        super().__init__(f"line {line}: transcription references unknown sample {sample_id!r}")
        self.sample_id = sample_id
        self.line = line


class DuplicateKey(DataError):
    def __init__(self, key: tuple, line: int):
        super().__init__(f"line {line}: duplicate transcription key {key!r}")
        self.key = key
        self.line = line


class CorpusLoadError(DataError):
    """Aggregate failure: the whole load is rejected with a line-numbered report."""

    def __init__(self, path: Path, errors: list[DataError]):
        self.path = Path(path)
        self.errors = errors
        report = "\n".join(f"  - {e}" for e in errors)
        super().__init__(f"{path}: {len(errors)} invalid record(s)\n{report}")


class WrongArity(DataError):
    def __init__(self, expected: int, got: int):
        super().__init__(f"expected {expected} component scores, got {got}")
        self.expected = expected
        self.got = got


class OutOfRange(DataError):
    def __init__(self, index: int, value: int, component_max: int):
        super().__init__(
            f"component {index} score {value} outside [0, {component_max}]"
        )
        self.index = index
        self.value = value
        self.component_max = component_max


@dataclass(frozen=True)
class RubricScore:
    """Component scores for one graded solution; total is always their sum."""

    components: tuple[int, ...]

    @property
    def total(self) -> int:
        return sum(self.components)

    def __post_init__(self):
        if any(not isinstance(c, int) for c in self.components):
            raise OutOfRange(0, self.components[0], 0)


def validate_rubric_score(
    raw: Iterable[int],
    r: int = DEFAULT_R,
    component_max: int = DEFAULT_COMPONENT_MAX,
) -> RubricScore:
    """Check arity and per-component range, returning a RubricScore.

    Raises WrongArity or OutOfRange (naming the first offending index).
    """
    values = tuple(raw)
    if len(values) != r:
        raise WrongArity(r, len(values))
    for i, v in enumerate(values):
        if not isinstance(v, int) or isinstance(v, bool) or not 0 <= v <= component_max:
            raise OutOfRange(i, v, component_max)
    return RubricScore(values)


def component_names(r: int = DEFAULT_R) -> tuple[str, ...]:
    """Canonical component names; generic names for custom rubric sizes."""
    if r == DEFAULT_R:
        return COMPONENT_NAMES
    return tuple(f"component_{i + 1}" for i in range(r))


@dataclass(frozen=True)
class SolutionSample:
    sample_id: str
    problem_id: str
    problem_text: str
    reference_solution: str
    gt_transcription: str
    image_ref: str | None = None
    perturbation_tag: str | None = None
    is_clean: bool = False


@dataclass(frozen=True)
class Transcription:
    sample_id: str
    model_id: str
    prompt_variant: str
    text: str

    @property
    def key(self) -> tuple[str, str, str]:
        return (self.sample_id, self.model_id, self.prompt_variant)


@dataclass(frozen=True)
class Corpus:
    samples: tuple[SolutionSample, ...]
    name: str = ""
    version: str = ""
    source_note: str = ""

    def __post_init__(self):
        if not self.samples:
            raise DataError("corpus must contain at least one sample")

    def __iter__(self) -> Iterator[SolutionSample]:
        return iter(self.samples)

    def __len__(self) -> int:
        return len(self.samples)

    def get(self, sample_id: str) -> SolutionSample:
        return self.by_id[sample_id]

    @property
    def by_id(self) -> dict[str, SolutionSample]:
        return {s.sample_id: s for s in self.samples}


@dataclass
class TranscriptionSet:
    """Keyed lookup over (sample_id, model_id, prompt_variant)."""

    entries: dict[tuple[str, str, str], Transcription] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self) -> Iterator[Transcription]:
        return iter(self.entries.values())

    def get(self, sample_id: str, model_id: str, prompt_variant: str = "standard") -> Transcription:
        return self.entries[(sample_id, model_id, prompt_variant)]

    @property
    def model_ids(self) -> list[str]:
        return sorted({t.model_id for t in self.entries.values()})

    @property
    def prompt_variants(self) -> list[str]:
        return sorted({t.prompt_variant for t in self.entries.values()})

    def for_model(self, model_id: str, prompt_variant: str = "standard") -> list[Transcription]:
        return sorted(
            (t for t in self.entries.values()
             if t.model_id == model_id and t.prompt_variant == prompt_variant),
            key=lambda t: t.sample_id,
        )


@dataclass(frozen=True)
class EvalRecord:
    """One (sample x model x judge x run) grading outcome with its penalty."""

    sample_id: str
    model_id: str
    judge_id: str
    run_index: int
    oracle: RubricScore
    model: RubricScore
    deltas: tuple[int, ...]
    classifications: tuple[str, ...]
    penalized: tuple[int, ...]
    penalized_total: int
    threshold_used: int
    ocr_variant: str = "standard"
    rubric_variant: str = "original"

    def validate(self) -> None:
        """Recompute deltas / classifications / penalized and compare to stored."""
        from . import penalty  # local import: penalty depends on this module

        cfg = penalty.PenaltyConfig(
            threshold=self.threshold_used,
            r=len(self.oracle.components),
            component_max=max(DEFAULT_COMPONENT_MAX, *self.oracle.components, *self.model.components),
        )
        expected_deltas = tuple(
            m - o for m, o in zip(self.model.components, self.oracle.components)
        )
        if self.deltas != expected_deltas:
            raise DataError(f"{self.sample_id}/{self.model_id}: stored deltas inconsistent")
        expected_cls = tuple(penalty.classify(d, cfg) for d in self.deltas)
        if self.classifications != expected_cls:
            raise DataError(f"{self.sample_id}/{self.model_id}: stored classifications inconsistent")
        expected_pen = tuple(
            penalty.penalize_component(m, o, cfg)
            for m, o in zip(self.model.components, self.oracle.components)
        )
        if self.penalized != expected_pen or self.penalized_total != sum(expected_pen):
            raise DataError(f"{self.sample_id}/{self.model_id}: stored penalty inconsistent")

    def to_json_dict(self) -> dict:
        return {
            "sample_id": self.sample_id,
            "model_id": self.model_id,
            "judge_id": self.judge_id,
            "run_index": self.run_index,
            "oracle": list(self.oracle.components),
            "model": list(self.model.components),
            "deltas": list(self.deltas),
            "classifications": list(self.classifications),
            "penalized": list(self.penalized),
            "penalized_total": self.penalized_total,
            "threshold_used": self.threshold_used,
            "ocr_variant": self.ocr_variant,
            "rubric_variant": self.rubric_variant,
        }

    @classmethod
    def from_json_dict(cls, d: Mapping) -> "EvalRecord":
        return cls(
            sample_id=d["sample_id"],
            model_id=d["model_id"],
            judge_id=d["judge_id"],
            run_index=int(d["run_index"]),
            oracle=RubricScore(tuple(int(x) for x in d["oracle"])),
            model=RubricScore(tuple(int(x) for x in d["model"])),
            deltas=tuple(int(x) for x in d["deltas"]),
            classifications=tuple(d["classifications"]),
            penalized=tuple(int(x) for x in d["penalized"]),
            penalized_total=int(d["penalized_total"]),
            threshold_used=int(d["threshold_used"]),
            ocr_variant=d.get("ocr_variant", "standard"),
            rubric_variant=d.get("rubric_variant", "original"),
        )


_CORPUS_REQUIRED = (
    "sample_id",
    "problem_id",
    "problem_text",
    "reference_solution",
    "gt_transcription",
)

_TRANSCRIPTION_REQUIRED = ("sample_id", "model_id", "prompt_variant", "text")


def _parse_lines(path: Path) -> Iterator[tuple[int, dict]]:
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            yield lineno, json.loads(line)


def load_corpus(path: str | Path, check_images: bool = True) -> Corpus:
    """Load and validate a line-delimited corpus file.

    Every record must parse; otherwise the whole load fails with a
    CorpusLoadError listing each offending line.
    """
    path = Path(path)
    errors: list[DataError] = []
    samples: list[SolutionSample] = []
    seen: dict[str, int] = {}

    for lineno, rec in _parse_lines(path):
        missing = [f for f in _CORPUS_REQUIRED if f not in rec]
        if missing:
            errors.append(MissingField(missing[0], lineno))
            continue
        sid = rec["sample_id"]
        if sid in seen:
            errors.append(DuplicateSampleId(sid, lineno))
            continue
        seen[sid] = lineno
        if not str(rec["gt_transcription"]).strip():
            errors.append(EmptyTranscription(sid, lineno))
            continue
        image_ref = rec.get("image_ref")
        if image_ref and check_images and not (path.parent / image_ref).exists():
            errors.append(UnresolvableImageRef(image_ref, lineno))
            continue
        samples.append(
            SolutionSample(
                sample_id=sid,
                problem_id=str(rec["problem_id"]),
                problem_text=str(rec["problem_text"]),
                reference_solution=str(rec["reference_solution"]),
                gt_transcription=str(rec["gt_transcription"]),
                image_ref=image_ref,
                perturbation_tag=rec.get("perturbation_tag"),
                is_clean=bool(rec.get("is_clean", False)),
            )
        )
    if errors:
        raise CorpusLoadError(path, errors)
    return Corpus(samples=tuple(samples), name=path.stem)


def load_transcriptions(path: str | Path, corpus: Corpus) -> TranscriptionSet:
    """Load transcriptions, rejecting unknown sample ids and duplicate keys."""
    path = Path(path)
    known = set(corpus.by_id)
    errors: list[DataError] = []
    out = TranscriptionSet()

    for lineno, rec in _parse_lines(path):
        missing = [f for f in _TRANSCRIPTION_REQUIRED if f not in rec]
        if missing:
            errors.append(MissingField(missing[0], lineno))
            continue
        t = Transcription(
            sample_id=str(rec["sample_id"]),
            model_id=str(rec["model_id"]),
            prompt_variant=str(rec["prompt_variant"]),
            text=str(rec["text"]),
        )
        if t.sample_id not in known:
            errors.append(UnknownSampleId(t.sample_id, lineno))
            continue
        if t.key in out.entries:
            errors.append(DuplicateKey(t.key, lineno))
            continue
        out.entries[t.key] = t
    if errors:
        raise CorpusLoadError(path, errors)
    return out


def dump_corpus(corpus: Corpus, path: str | Path) -> None:
    """Serialize a corpus back to its line-delimited form (round-trips load)."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for s in corpus.samples:
            rec = {
                "sample_id": s.sample_id,
                "problem_id": s.problem_id,
                "problem_text": s.problem_text,
                "reference_solution": s.reference_solution,
                "gt_transcription": s.gt_transcription,
                "is_clean": s.is_clean,
            }
            if s.image_ref is not None:
                rec["image_ref"] = s.image_ref
            if s.perturbation_tag is not None:
                rec["perturbation_tag"] = s.perturbation_tag
            fh.write(json.dumps(rec, ensure_ascii=False) + "\n")
