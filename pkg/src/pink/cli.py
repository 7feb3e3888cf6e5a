"""Command-line interface: pink grade|score|sweep|repro|mitigate|label|serve|report.

Every subcommand takes --config <file>; individual flags override config
fields.  Exit codes: 0 success, 1 configuration or input error, 2 grading
failure rate above the configured threshold.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

from . import pipeline, store
from .analysis import AnalysisError
from .config import ConfigError, load_config
from .datamodel import DataError
from .judge import JudgeError

log = logging.getLogger("pink")

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_PARTIAL = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pink",
        description="Faithfulness-aware evaluation for multi-line handwritten-math OCR",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name: str, help_text: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="pipeline config JSON")
        p.add_argument("--corpus", help="override corpus path")
        p.add_argument("--store-dir", dest="store_dir", help="override record store dir")
        p.add_argument("--report-dir", dest="report_dir", help="override report dir")
        p.add_argument("--cache-dir", dest="cache_dir", help="override judge cache dir")
        p.add_argument("--runs", type=int, help="override grading runs")
        return p

    add("grade", "grade all transcriptions and store evaluation records")
    add("score", "aggregate stored records into the leaderboard reports")

    p = add("sweep", "recompute rankings across penalty thresholds")
    p.add_argument("--thresholds", help="comma-separated threshold list, e.g. 0,5,10,15,20")

    add("repro", "cross-grader, run-stability, and prompt-sensitivity reports")
    add("mitigate", "compare standard vs mitigated OCR prompt records")

    p = add("label", "classify (ground truth, OCR) discrepancies with the judge")
    p.add_argument("--model-id", action="append", dest="model_ids",
                   help="restrict to a model (repeatable)")

    p = add("serve", "serve the annotation API and UI")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8321)

    p = add("report", "re-render reports, figures, and the markdown summary")
    p.add_argument("--markdown", action="store_true", help="also write report.md")
    p.add_argument("--no-figures", action="store_true", help="skip figure rendering")
    return parser


def _overrides(args: argparse.Namespace) -> dict:
    return {
        key: getattr(args, key, None)
        for key in ("corpus", "store_dir", "report_dir", "cache_dir", "runs")
    }


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        config = load_config(args.config, _overrides(args))
    except (ConfigError, DataError) as exc:
        log.error("%s", exc)
        return EXIT_CONFIG

    try:
        if args.command == "grade":
            summary = pipeline.cmd_grade(config)
            log.info(
                "graded %d records (%d failures, %.1f%%); judge calls %s, cache hits %s",
                summary["n_records"], summary["n_failures"], summary["failure_pct"],
                summary["judge_calls"], summary["cache_hits"],
            )
            if summary["failure_pct"] > config.failure_threshold_pct:
                log.error(
                    "failure rate %.1f%% exceeds threshold %.1f%%",
                    summary["failure_pct"], config.failure_threshold_pct,
                )
                return EXIT_PARTIAL
            return EXIT_OK

        if args.command == "score":
            result = pipeline.cmd_score(config)
            for entry in result["leaderboard"]:
                log.info(
                    "#%d %-20s pink=%.4f bleu=%.4f ned=%.4f oc=%.2f",
                    entry.rank_pink, entry.model_id, entry.pink, entry.bleu,
                    entry.norm_edit_distance, entry.oc_rate,
                )
            return EXIT_OK

        if args.command == "sweep":
            t_values = None
            if args.thresholds:
                t_values = [int(t) for t in args.thresholds.split(",") if t.strip()]
            result = pipeline.cmd_sweep(config, t_values)
            for t in result["thresholds"]:
                log.info("T=%-3d tau=%.4f ranking=%s", t,
                         result["tau_vs_baseline"][str(t)], result["rankings"][str(t)])
            return EXIT_OK

        if args.command == "repro":
            result = pipeline.cmd_repro(config)
            for section, payload in result.items():
                status = "skipped: " + payload["skipped"] if "skipped" in payload else "written"
                log.info("%s: %s", section, status)
            return EXIT_OK

        if args.command == "mitigate":
            result = pipeline.cmd_mitigate(config)
            avg = result["averages"]
            log.info(
                "mitigation: mean dPINK %+.3f, mean dOC %+.1f pp over %d models",
                avg["pink_delta"], avg["oc_delta_pp"], len(result["rows"]),
            )
            return EXIT_OK

        if args.command == "label":
            result = pipeline.cmd_label(config, args.model_ids)
            overall = result["overall"]
            log.info(
                "labeled %d pairs: %s (formatting involved %.1f%% of discrepant)",
                overall["n_pairs"], overall["counts"], overall["formatting_involved_pct"],
            )
            return EXIT_OK

        if args.command == "serve":
            from .server import serve

            serve(config, host=args.host, port=args.port)
            return EXIT_OK

        if args.command == "report":
            from .report import cmd_report

            written = cmd_report(
                config, markdown=args.markdown, figures=not args.no_figures
            )
            for path in written:
                log.info("wrote %s", path)
            return EXIT_OK

    except store.MissingStore as exc:
        log.error("%s (run `pink grade` first)", exc)
        return EXIT_CONFIG
    except (DataError, AnalysisError, ConfigError) as exc:
        log.error("%s", exc)
        return EXIT_CONFIG
    except JudgeError as exc:
        log.error("judge failure: %s", exc)
        return EXIT_PARTIAL

    return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
