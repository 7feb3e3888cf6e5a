"""Rubric grading and discrepancy labeling through a pluggable judge.

Two judge implementations share one surface: LlmJudge speaks to any
OpenAI-compatible chat-completions endpoint (credentials only from the
PINK_JUDGE_API_KEY environment variable), MockJudge serves deterministic
fixture responses offline.  Every graded result is stored in a
content-addressed cache keyed by (judge_id, model_name, rubric variant,
content hash, run index), so identical calls never repeat a network round
trip and oracle gradings are shared across all models of a run.
"""

from __future__ import annotations

import hashlib
import json
import os
import random
import re
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path

import httpx

from . import prompts
from .datamodel import component_names, validate_rubric_score

API_KEY_ENV = "PINK_JUDGE_API_KEY"

DISCREPANCY_LABELS = (
    "NoDiscrepancy",
    "FormattingOnly",
    "IncludesFormatting",
    "SemanticOnly",
)


class JudgeError(Exception):
    pass


class TransportError(JudgeError):
    pass


class Timeout(TransportError):
    pass


class ParseError(JudgeError):
    def __init__(self, reason: str, raw_text: str = ""):
        super().__init__(reason)
        self.reason = reason
        self.raw_text = raw_text  # preserved for audit


class FixtureMiss(JudgeError):
    pass


@dataclass(frozen=True)
class JudgeConfig:
    judge_id: str
    kind: str = "openai"  # "openai" or "mock"
    endpoint_url: str = ""
    model_name: str = ""
    temperature: float = 0.0
    max_retries: int = 3
    timeout_s: float = 120.0
    parallelism: int = 1
    rubric_prompt_variant: str = "original"
    fixture_path: str | None = None

    def __post_init__(self):
        if self.parallelism < 1:
            raise ValueError("parallelism must be >= 1")
        if self.max_retries < 0:
            raise ValueError("max_retries must be >= 0")


@dataclass(frozen=True)
class GradeResponse:
    components: tuple[int, ...]
    justifications: tuple[str, ...]
    raw_text: str

    def score(self, component_max: int = 20):
        return validate_rubric_score(self.components, len(self.components), component_max)


def content_hash(*texts: str) -> str:
    payload = json.dumps(list(texts), ensure_ascii=False).encode("utf-8")
    return hashlib.sha256(payload).hexdigest()


def cache_key(
    judge_id: str,
    model_name: str,
    rubric_prompt_variant: str,
    content: str,
    run_index: int,
    kind: str = "grade",
) -> str:
    payload = json.dumps(
        [kind, judge_id, model_name, rubric_prompt_variant, content, run_index]
    ).encode("utf-8")
    return hashlib.sha256(payload).hexdigest()


class JudgeCache:
    """Content-addressed store of judge responses, one {key}.json per entry.

    Inserts are atomic (temp file then rename) behind a lock; reads are
    lock-free, so concurrent graders can share one cache directory.
    """

    def __init__(self, directory: str | Path):
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()

    def _path(self, key: str) -> Path:
        return self.directory / f"{key}.json"

    def get(self, key: str) -> dict | None:
        path = self._path(key)
        if not path.exists():
            return None
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)

    def put(self, key: str, value: dict) -> None:
        path = self._path(key)
        tmp = path.with_suffix(".json.tmp")
        with self._lock:
            with open(tmp, "w", encoding="utf-8") as fh:
                json.dump(value, fh, ensure_ascii=False, indent=0)
            os.replace(tmp, path)


_SCORE_LINE = re.compile(
    r"^\s*(?P<name>[A-Za-z_][A-Za-z0-9_]*)\s*:\s*(?P<score>\d+)\s*/\s*(?P<max>\d+)"
    r"\s*(?:[-–—]\s*(?P<just>.*?))?\s*$"
)


def render_grade_block(
    components, justifications=None, r: int = 5, component_max: int = 20
) -> str:
    """Render scores in the canonical fenced response block (mock + tests)."""
    names = component_names(r)
    justs = justifications or [""] * r
    lines = [
        f"{name}: {score}/{component_max} - {just}".rstrip()
        for name, score, just in zip(names, components, justs)
    ]
    return "```\n" + "\n".join(lines) + "\n```"


def parse_grade_response(
    raw_text: str, r: int = 5, component_max: int = 20
) -> tuple[tuple[int, ...], tuple[str, ...]]:
    """Extract the structured score block from judge output.

    Surrounding prose is tolerated: the last r lines matching
    "name: score/max - justification" must name the rubric components in
    canonical order.  Fractional scores never match the integer grammar and
    therefore fail here rather than being rounded downstream.
    """
    matches = []
    for line in raw_text.splitlines():
        if line.strip().startswith("```"):
            continue
        m = _SCORE_LINE.match(line)
        if m:
            matches.append(m)
    if len(matches) < r:
        raise ParseError(
            f"expected {r} components, found {len(matches)} score lines", raw_text
        )
    tail = matches[-r:]
    names = component_names(r)
    scores = []
    justifications = []
    for expected, m in zip(names, tail):
        if m.group("name") != expected:
            raise ParseError(
                f"expected component {expected!r}, got {m.group('name')!r}", raw_text
            )
        if int(m.group("max")) != component_max:
            raise ParseError(
                f"component {expected!r} scored out of {m.group('max')}, "
                f"expected /{component_max}",
                raw_text,
            )
        scores.append(int(m.group("score")))
        justifications.append(m.group("just") or "")
    try:
        validate_rubric_score(scores, r, component_max)
    except Exception as exc:
        raise ParseError(str(exc), raw_text) from exc
    return tuple(scores), tuple(justifications)


_LABEL_LINE = re.compile(r"^\s*label\s*:\s*(?P<label>[a-z_]+)\s*$")


def parse_label_response(raw_text: str) -> str:
    label = None
    for line in raw_text.splitlines():
        m = _LABEL_LINE.match(line)
        if m:
            label = m.group("label")
    if label is None:
        raise ParseError("no label line found", raw_text)
    if label not in prompts.LABEL_TO_ENUM:
        raise ParseError(f"unknown label {label!r}", raw_text)
    return prompts.LABEL_TO_ENUM[label]


class Judge:
    """Shared grade/label surface with caching and call accounting."""

    def __init__(self, config: JudgeConfig, cache: JudgeCache | None = None):
        self.config = config
        self.cache = cache
        self.cache_hits = 0
        self.judge_calls = 0  # uncached completions actually performed
        self._count_lock = threading.Lock()

    # -- public operations -------------------------------------------------

    def grade(
        self,
        problem_text: str,
        reference_solution: str,
        candidate_text: str,
        run_index: int = 0,
        r: int = 5,
        component_max: int = 20,
    ) -> GradeResponse:
        content = content_hash(problem_text, reference_solution, candidate_text)
        key = cache_key(
            self.config.judge_id,
            self.config.model_name,
            self.config.rubric_prompt_variant,
            content,
            run_index,
        )
        if self.cache is not None:
            cached = self.cache.get(key)
            if cached is not None:
                with self._count_lock:
                    self.cache_hits += 1
                return GradeResponse(
                    components=tuple(cached["components"]),
                    justifications=tuple(cached["justifications"]),
                    raw_text=cached["raw_text"],
                )
        response = self._grade_uncached(
            problem_text, reference_solution, candidate_text, content, r, component_max
        )
        with self._count_lock:
            self.judge_calls += 1
        if self.cache is not None:
            self.cache.put(
                key,
                {
                    "raw_text": response.raw_text,
                    "components": list(response.components),
                    "justifications": list(response.justifications),
                },
            )
        return response

    def label(self, gt_transcription: str, ocr_text: str) -> str:
        content = content_hash(gt_transcription, ocr_text)
        key = cache_key(
            self.config.judge_id,
            self.config.model_name,
            self.config.rubric_prompt_variant,
            content,
            0,
            kind="label",
        )
        if self.cache is not None:
            cached = self.cache.get(key)
            if cached is not None:
                with self._count_lock:
                    self.cache_hits += 1
                return cached["label"]
        label = self._label_uncached(gt_transcription, ocr_text, content)
        with self._count_lock:
            self.judge_calls += 1
        if self.cache is not None:
            self.cache.put(key, {"label": label})
        return label

    # -- implementation hooks ----------------------------------------------

    def _grade_uncached(
        self, problem_text, reference_solution, candidate_text, content, r, component_max
    ) -> GradeResponse:
        raise NotImplementedError

    def _label_uncached(self, gt_transcription, ocr_text, content) -> str:
        raise NotImplementedError


class LlmJudge(Judge):
    """Judge backed by an OpenAI-compatible chat-completions endpoint."""

    def __init__(self, config: JudgeConfig, cache: JudgeCache | None = None):
        super().__init__(config, cache)
        if not config.endpoint_url:
            raise ValueError("LlmJudge requires endpoint_url")
        url = config.endpoint_url.rstrip("/")
        if not url.endswith("/chat/completions"):
            url = url + "/chat/completions"
        self._url = url

    def _headers(self) -> dict:
        headers = {"Content-Type": "application/json"}
        api_key = os.environ.get(API_KEY_ENV)
        if api_key:
            headers["Authorization"] = f"Bearer {api_key}"
        return headers

    def _complete(self, messages: list[dict]) -> str:
        """One chat completion with exponential backoff and jitter."""
        payload = {
            "model": self.config.model_name,
            "messages": messages,
            "temperature": self.config.temperature,
        }
        last_error: Exception | None = None
        for attempt in range(self.config.max_retries + 1):
            try:
                response = httpx.post(
                    self._url,
                    json=payload,
                    headers=self._headers(),
                    timeout=self.config.timeout_s,
                )
                if response.status_code in (429, 500, 502, 503, 504):
                    last_error = TransportError(
                        f"HTTP {response.status_code} from {self._url}"
                    )
                elif response.status_code != 200:
                    raise TransportError(
                        f"HTTP {response.status_code} from {self._url}: {response.text[:500]}"
                    )
                else:
                    body = response.json()
                    return body["choices"][0]["message"]["content"]
            except httpx.TimeoutException as exc:
                last_error = Timeout(str(exc))
            except httpx.HTTPError as exc:
                last_error = TransportError(str(exc))
            if attempt < self.config.max_retries:
                time.sleep((2**attempt) * 0.5 + random.uniform(0, 0.25))
        assert last_error is not None
        raise last_error

    def _grade_uncached(
        self, problem_text, reference_solution, candidate_text, content, r, component_max
    ) -> GradeResponse:
        prompt = prompts.build_grading_prompt(
            problem_text,
            reference_solution,
            candidate_text,
            self.config.rubric_prompt_variant,
            r=r,
            component_max=component_max,
        )
        messages = [{"role": "user", "content": prompt}]
        raw = self._complete(messages)
        try:
            components, justifications = parse_grade_response(raw, r, component_max)
        except ParseError:
            # One re-ask with a format reminder bounds the cost of sloppy output.
            reminder = prompts.FORMAT_REMINDER.format(r=r, component_max=component_max)
            retry_messages = messages + [
                {"role": "assistant", "content": raw},
                {"role": "user", "content": reminder},
            ]
            raw = self._complete(retry_messages)
            components, justifications = parse_grade_response(raw, r, component_max)
        return GradeResponse(components, justifications, raw)

    def _label_uncached(self, gt_transcription, ocr_text, content) -> str:
        prompt = prompts.build_labeling_prompt(gt_transcription, ocr_text)
        raw = self._complete([{"role": "user", "content": prompt}])
        return parse_label_response(raw)


class MockJudge(Judge):
    """Deterministic fixture-backed judge for offline runs and golden tests.

    Grade fixtures map a content hash (problem, reference, candidate) to
    component scores; label fixtures map a content hash (gt, ocr) to a
    label.  Responses are rendered in the canonical block format and fed
    through the real parser, so the full response contract is exercised.
    """

    def __init__(
        self,
        config: JudgeConfig,
        cache: JudgeCache | None = None,
        grades: dict[str, dict] | None = None,
        labels: dict[str, str] | None = None,
    ):
        super().__init__(config, cache)
        if grades is None and config.fixture_path:
            with open(config.fixture_path, encoding="utf-8") as fh:
                fixture = json.load(fh)
            grades = fixture.get("grades", {})
            labels = fixture.get("labels", {})
        self.grades = grades or {}
        self.labels = labels or {}

    def _grade_uncached(
        self, problem_text, reference_solution, candidate_text, content, r, component_max
    ) -> GradeResponse:
        entry = self.grades.get(content)
        if entry is None:
            raise FixtureMiss(f"no grade fixture for content hash {content}")
        raw = render_grade_block(
            entry["components"],
            entry.get("justifications"),
            r=r,
            component_max=component_max,
        )
        components, justifications = parse_grade_response(raw, r, component_max)
        return GradeResponse(components, justifications, raw)

    def _label_uncached(self, gt_transcription, ocr_text, content) -> str:
        raw_label = self.labels.get(content)
        if raw_label is None:
            raise FixtureMiss(f"no label fixture for content hash {content}")
        if raw_label in prompts.LABEL_TO_ENUM:
            return prompts.LABEL_TO_ENUM[raw_label]
        if raw_label in DISCREPANCY_LABELS:
            return raw_label
        raise ParseError(f"fixture label {raw_label!r} unknown")


def make_judge(config: JudgeConfig, cache_dir: str | Path | None = None) -> Judge:
    cache = JudgeCache(Path(cache_dir) / config.judge_id) if cache_dir else None
    if config.kind == "mock":
        return MockJudge(config, cache)
    if config.kind == "openai":
        return LlmJudge(config, cache)
    raise ValueError(f"unknown judge kind {config.kind!r}")


def grade_pair(
    judge: Judge,
    sample,
    transcription,
    run_index: int = 0,
    r: int = 5,
    component_max: int = 20,
):
    """Grade the oracle (ground truth) and the model output for one sample.

    Both gradings run against the sample's reference solution.  The oracle
    grading is cached per (judge, variant, content, run), so across many
    models it is performed once per sample and run.
    """
    if sample.sample_id != transcription.sample_id:
        raise ValueError(
            f"sample {sample.sample_id!r} does not match transcription "
            f"{transcription.sample_id!r}"
        )
    oracle = judge.grade(
        sample.problem_text,
        sample.reference_solution,
        sample.gt_transcription,
        run_index,
        r=r,
        component_max=component_max,
    )
    model = judge.grade(
        sample.problem_text,
        sample.reference_solution,
        transcription.text,
        run_index,
        r=r,
        component_max=component_max,
    )
    return oracle.score(component_max), model.score(component_max)


def label_discrepancy(judge: Judge, gt_transcription: str, ocr_text: str) -> str:
    """Classify the (gt, ocr) discrepancy into one of the four labels."""
    return judge.label(gt_transcription, ocr_text)
