"""Bundled mini-benchmark data and workspace setup.

The mini benchmark (12 samples x 3 synthetic OCR models, mock judge) backs
the offline golden tests and doubles as a runnable end-to-end example:

    python3 -m pink.data my-workspace
    pink grade --config my-workspace/config.json
    pink score --config my-workspace/config.json
"""

from __future__ import annotations

import json
import shutil
import sys
from importlib import resources
from pathlib import Path

MINI_FILES = ("corpus.jsonl", "transcriptions.jsonl", "judge_fixture.json")


def mini_dir() -> Path:
    return Path(resources.files("pink.data") / "mini")


def mini_corpus_path() -> Path:
    return mini_dir() / "corpus.jsonl"


def mini_transcriptions_path() -> Path:
    return mini_dir() / "transcriptions.jsonl"


def mini_fixture_path() -> Path:
    return mini_dir() / "judge_fixture.json"


def mini_config_dict(workspace: str | Path, runs: int = 1, judges: int = 1) -> dict:
    """Pipeline config for running the mini benchmark inside `workspace`."""
    workspace = Path(workspace)
    return {
        "corpus": "corpus.jsonl",
        "transcriptions": ["transcriptions.jsonl"],
        "judges": [
            {
                "judge_id": "mock-judge" if k == 0 else f"mock-judge-{k + 1}",
                "kind": "mock",
                "fixture_path": "judge_fixture.json",
                "rubric_prompt_variant": "original",
            }
            for k in range(judges)
        ],
        "runs": runs,
        "cache_dir": "cache",
        "store_dir": "store",
        "report_dir": "reports",
        "annotation_dir": "annotations",
        "annotation": {"seed": "mini-benchmark-seed"},
    }


def write_mini_workspace(dest: str | Path, runs: int = 1, judges: int = 1) -> Path:
    """Copy the mini benchmark into `dest` and write a ready config.json."""
    dest = Path(dest)
    dest.mkdir(parents=True, exist_ok=True)
    for name in MINI_FILES:
        shutil.copy(mini_dir() / name, dest / name)
    config_path = dest / "config.json"
    with open(config_path, "w", encoding="utf-8") as fh:
        json.dump(mini_config_dict(dest, runs=runs, judges=judges), fh, indent=2)
        fh.write("\n")
    return config_path


def main(argv: list[str] | None = None) -> int:
    args = argv if argv is not None else sys.argv[1:]
    if len(args) != 1:
        print("usage: python3 -m pink.data <workspace-dir>", file=sys.stderr)
        return 1
    config_path = write_mini_workspace(args[0])
    print(f"mini benchmark workspace ready: {config_path}")
    return 0
