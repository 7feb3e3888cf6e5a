"""Pipeline configuration: JSON file plus CLI flag overrides.

Relative paths in a config file are resolved against the file's directory,
so a benchmark workspace can be moved or checked in wholesale.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .judge import JudgeConfig
from .penalty import PenaltyConfig

DEFAULT_SWEEP_THRESHOLDS = [0, 2, 5, 8, 10, 12, 15, 18, 20]


class ConfigError(Exception):
    pass


@dataclass
class AnnotationConfig:
    seed: str = "pink-annotation-seed"
    model_id: str | None = None  # None: build tasks for every model
    bracket_edges: list[float] | None = None
    ui_dir: str | None = None


@dataclass
class PipelineConfig:
    corpus: Path
    transcriptions: list[Path]
    judges: list[JudgeConfig]
    penalty: PenaltyConfig = field(default_factory=PenaltyConfig)
    bleu_mode: str = "corpus"
    runs: int = 1
    cache_dir: Path = Path("cache")
    store_dir: Path = Path("store")
    report_dir: Path = Path("reports")
    annotation_dir: Path = Path("annotations")
    annotation: AnnotationConfig = field(default_factory=AnnotationConfig)
    failure_threshold_pct: float = 5.0
    sweep_thresholds: list[int] = field(default_factory=lambda: list(DEFAULT_SWEEP_THRESHOLDS))

    def __post_init__(self):
        if self.runs < 1:
            raise ConfigError("runs must be >= 1")
        if not self.judges:
            raise ConfigError("at least one judge must be configured")
        ids = [j.judge_id for j in self.judges]
        if len(set(ids)) != len(ids):
            raise ConfigError(f"duplicate judge ids: {ids}")

    @property
    def primary_judge(self) -> JudgeConfig:
        return self.judges[0]

    def to_json_dict(self) -> dict:
        return {
            "corpus": str(self.corpus),
            "transcriptions": [str(p) for p in self.transcriptions],
            "judges": [vars(j) | {} for j in self.judges],
            "penalty": {
                "threshold": self.penalty.threshold,
                "component_max": self.penalty.component_max,
                "r": self.penalty.r,
            },
            "bleu_mode": self.bleu_mode,
            "runs": self.runs,
            "cache_dir": str(self.cache_dir),
            "store_dir": str(self.store_dir),
            "report_dir": str(self.report_dir),
            "annotation_dir": str(self.annotation_dir),
            "annotation": vars(self.annotation) | {},
            "failure_threshold_pct": self.failure_threshold_pct,
            "sweep_thresholds": list(self.sweep_thresholds),
        }


def _resolve(base: Path, value: str) -> Path:
    path = Path(value)
    return path if path.is_absolute() else (base / path)


def load_config(path: str | Path, overrides: dict | None = None) -> PipelineConfig:
    """Parse a JSON config file, applying flat CLI overrides on top."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
    if overrides:
        raw.update({k: v for k, v in overrides.items() if v is not None})
    return parse_config(raw, base_dir=path.parent)


def parse_config(raw: dict, base_dir: str | Path = ".") -> PipelineConfig:
    base = Path(base_dir)
    try:
        judges = [_parse_judge(j, base) for j in raw["judges"]]
        penalty_raw = raw.get("penalty", {})
        penalty = PenaltyConfig(
            threshold=int(penalty_raw.get("threshold", 10)),
            component_max=int(penalty_raw.get("component_max", 20)),
            r=int(penalty_raw.get("r", 5)),
        )
        ann_raw = raw.get("annotation", {})
        annotation = AnnotationConfig(
            seed=str(ann_raw.get("seed", "pink-annotation-seed")),
            model_id=ann_raw.get("model_id"),
            bracket_edges=ann_raw.get("bracket_edges"),
            ui_dir=str(_resolve(base, ann_raw["ui_dir"])) if ann_raw.get("ui_dir") else None,
        )
        transcriptions = raw["transcriptions"]
        if isinstance(transcriptions, str):
            transcriptions = [transcriptions]
        return PipelineConfig(
            corpus=_resolve(base, raw["corpus"]),
            transcriptions=[_resolve(base, t) for t in transcriptions],
            judges=judges,
            penalty=penalty,
            bleu_mode=raw.get("bleu_mode", "corpus"),
            runs=int(raw.get("runs", 1)),
            cache_dir=_resolve(base, raw.get("cache_dir", "cache")),
            store_dir=_resolve(base, raw.get("store_dir", "store")),
            report_dir=_resolve(base, raw.get("report_dir", "reports")),
            annotation_dir=_resolve(base, raw.get("annotation_dir", "annotations")),
            annotation=annotation,
            failure_threshold_pct=float(raw.get("failure_threshold_pct", 5.0)),
            sweep_thresholds=[int(t) for t in raw.get("sweep_thresholds", DEFAULT_SWEEP_THRESHOLDS)],
        )
    except KeyError as exc:
        raise ConfigError(f"missing required config field: {exc}") from exc
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid config value: {exc}") from exc


def _parse_judge(raw: dict, base: Path) -> JudgeConfig:
    fixture = raw.get("fixture_path")
    return JudgeConfig(
        judge_id=raw["judge_id"],
        kind=raw.get("kind", "openai"),
        endpoint_url=raw.get("endpoint_url", ""),
        model_name=raw.get("model_name", ""),
        temperature=float(raw.get("temperature", 0.0)),
        max_retries=int(raw.get("max_retries", 3)),
        timeout_s=float(raw.get("timeout_s", 120.0)),
        parallelism=int(raw.get("parallelism", 1)),
        rubric_prompt_variant=raw.get("rubric_prompt_variant", "original"),
        fixture_path=str(_resolve(base, fixture)) if fixture else None,
    )
