"""Durable storage: record stores, annotation log, manifests.

Everything is line-delimited JSON.  Record stores are written whole, sorted
by (sample_id, model_id, judge_id, run_index, variants), so re-running a
pipeline from the same cache produces byte-identical files.  The annotation
log is append-only with line-atomic writes: a crash mid-write never corrupts
prior rows.
"""

from __future__ import annotations

import hashlib
import json
import os
import threading
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator

from .datamodel import EvalRecord

RECORDS_FILE = "records.jsonl"
FAILURES_FILE = "failures.jsonl"
MANIFEST_FILE = "manifest.json"


class StoreError(Exception):
    pass


class MissingStore(StoreError):
    pass


def dumps_line(obj: dict) -> str:
    return json.dumps(obj, ensure_ascii=False, separators=(",", ":")) + "\n"


def file_sha256(path: str | Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def dict_sha256(obj) -> str:
    return hashlib.sha256(
        json.dumps(obj, ensure_ascii=False, sort_keys=True).encode("utf-8")
    ).hexdigest()


_RECORD_SORT_KEY = lambda r: (  # noqa: E731
    r.sample_id,
    r.model_id,
    r.judge_id,
    r.run_index,
    r.ocr_variant,
    r.rubric_variant,
)


def write_records(records: Iterable[EvalRecord], store_dir: str | Path) -> Path:
    store_dir = Path(store_dir)
    store_dir.mkdir(parents=True, exist_ok=True)
    path = store_dir / RECORDS_FILE
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for rec in sorted(records, key=_RECORD_SORT_KEY):
            fh.write(dumps_line(rec.to_json_dict()))
    return path


def read_records(store_dir: str | Path) -> list[EvalRecord]:
    path = Path(store_dir) / RECORDS_FILE
    if not path.exists():
        raise MissingStore(f"record store not found: {path}")
    records = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                records.append(EvalRecord.from_json_dict(json.loads(line)))
    return records


def write_failures(failures: list[dict], store_dir: str | Path) -> Path:
    store_dir = Path(store_dir)
    store_dir.mkdir(parents=True, exist_ok=True)
    path = store_dir / FAILURES_FILE
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for f in sorted(
            failures,
            key=lambda f: (f.get("sample_id", ""), f.get("model_id", ""),
                           f.get("judge_id", ""), f.get("run_index", 0)),
        ):
            fh.write(dumps_line(f))
    return path


def write_manifest(store_dir: str | Path, manifest: dict) -> Path:
    store_dir = Path(store_dir)
    store_dir.mkdir(parents=True, exist_ok=True)
    path = store_dir / MANIFEST_FILE
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(manifest, fh, ensure_ascii=False, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def read_manifest(store_dir: str | Path) -> dict:
    path = Path(store_dir) / MANIFEST_FILE
    if not path.exists():
        raise MissingStore(f"manifest not found: {path}")
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


@dataclass
class AnnotationStore:
    """Append-only annotation log plus the persisted A/B assignments.

    One writer lock serializes appends; each row is written and flushed as a
    single line so partial writes cannot corrupt earlier rows.
    """

    directory: Path

    def __post_init__(self):
        self.directory = Path(self.directory)
        self.directory.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()

    @property
    def annotations_path(self) -> Path:
        return self.directory / "annotations.jsonl"

    @property
    def assignments_path(self) -> Path:
        return self.directory / "assignments.jsonl"

    def _append(self, path: Path, row: dict) -> None:
        line = dumps_line(row)
        with self._lock:
            with open(path, "a", encoding="utf-8", newline="\n") as fh:
                fh.write(line)
                fh.flush()
                os.fsync(fh.fileno())

    def append_annotation(self, row: dict) -> None:
        self._append(self.annotations_path, row)

    def append_assignment(self, row: dict) -> None:
        self._append(self.assignments_path, row)

    def iter_annotations(self) -> Iterator[dict]:
        yield from self._iter(self.annotations_path)

    def iter_assignments(self) -> Iterator[dict]:
        yield from self._iter(self.assignments_path)

    @staticmethod
    def _iter(path: Path) -> Iterator[dict]:
        if not path.exists():
            return
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                if line.strip():
                    yield json.loads(line)

    def assignment_for(self, rater_id: str, sample_id: str, model_id: str) -> dict | None:
        """Latest persisted A/B mapping for this (rater, sample, model)."""
        found = None
        for row in self.iter_assignments():
            if (
                row["rater_id"] == rater_id
                and row["sample_id"] == sample_id
                and row["model_id"] == model_id
            ):
                found = row
        return found
