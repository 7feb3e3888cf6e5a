"""Aggregate score (penalized / oracle), BLEU and edit-distance baselines,
and over-correction frequency / magnitude summaries.

BLEU variant ("math-bleu4-eps"): text is tokenized on whitespace after every
math delimiter character  { } ^ _ \\ $ = + - * / ( )  (ASCII hyphen and the
unicode minus both count) is split into its own token; corpus-level BLEU with
up-to-4-gram clipped precision, brevity penalty, epsilon smoothing for zero
n-gram numerators, and effective order (n-gram orders with no candidate
n-grams anywhere in the corpus are dropped).  The variant name is stamped
into every report so numbers are only compared within a variant.
"""

from __future__ import annotations

import logging
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .datamodel import EvalRecord

log = logging.getLogger(__name__)

BLEU_VARIANT = "math-bleu4-eps"
BLEU_EPSILON = 1e-9
OC_BINS = ((0, 5), (5, 10), (10, 15), (15, 20))

_MATH_DELIMITERS = set("{}^_\\$=+-*/()") | {"−"}


class MetricError(Exception):
    pass


class EmptyInput(MetricError):
    pass


class AllOraclesZero(MetricError):
    pass


def pink_score(records: Iterable[EvalRecord]) -> float:
    """Sum of penalized totals over sum of oracle totals.

    Records whose oracle total is zero carry no faithfulness signal and are
    excluded with a logged count (never treated as 0/0).  Summation order is
    fixed by sorting, and both sums are integers, so the faithful case
    (penalized == oracle everywhere) is exactly 1.0.
    """
    recs = sorted(records, key=lambda r: (r.sample_id, r.model_id, r.judge_id, r.run_index))
    if not recs:
        raise EmptyInput("no records")
    included = [r for r in recs if r.oracle.total > 0]
    dropped = len(recs) - len(included)
    if dropped:
        log.warning("pink_score: excluded %d record(s) with zero oracle total", dropped)
    if not included:
        raise AllOraclesZero("every record has a zero oracle total")
    pen = sum(r.penalized_total for r in included)
    ora = sum(r.oracle.total for r in included)
    score = pen / ora
    assert score <= 1.0 + 1e-12, "penalized total exceeded oracle total"
    return score


def tokenize_math(text: str) -> list[str]:
    """Whitespace tokenization with math delimiter characters isolated."""
    chars: list[str] = []
    for ch in text:
        if ch in _MATH_DELIMITERS:
            chars.append(f" {ch} ")
        else:
            chars.append(ch)
    return "".join(chars).split()


def _ngram_counts(tokens: Sequence[str], n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def bleu(
    pairs: Sequence[tuple[str, str]],
    max_order: int = 4,
    mode: str = "corpus",
) -> float:
    """BLEU over (reference, hypothesis) pairs under the fixed variant.

    mode="corpus" pools n-gram counts across the whole pair list (default);
    mode="sentence_average" averages per-pair BLEU instead.
    """
    if not pairs:
        raise EmptyInput("no text pairs")
    if mode == "sentence_average":
        return math.fsum(bleu([p], max_order=max_order) for p in pairs) / len(pairs)
    if mode != "corpus":
        raise ValueError(f"unknown bleu mode {mode!r}")

    matched = [0] * max_order
    possible = [0] * max_order
    hyp_len = 0
    ref_len = 0
    for reference, hypothesis in pairs:
        ref_tokens = tokenize_math(reference)
        hyp_tokens = tokenize_math(hypothesis)
        hyp_len += len(hyp_tokens)
        ref_len += len(ref_tokens)
        for n in range(1, max_order + 1):
            hyp_counts = _ngram_counts(hyp_tokens, n)
            if not hyp_counts:
                continue
            ref_counts = _ngram_counts(ref_tokens, n)
            possible[n - 1] += sum(hyp_counts.values())
            matched[n - 1] += sum(
                min(c, ref_counts[g]) for g, c in hyp_counts.items()
            )

    orders = [i for i in range(max_order) if possible[i] > 0]
    if not orders:
        return 0.0
    if possible[0] > 0 and matched[0] == 0:
        # No unigram overlap at all: no signal worth smoothing.
        return 0.0
    log_precision = 0.0
    for i in orders:
        p = matched[i] / possible[i]
        if p == 0.0:
            p = BLEU_EPSILON
        log_precision += math.log(p)
    log_precision /= len(orders)

    if hyp_len == 0:
        return 0.0
    bp = 1.0 if hyp_len >= ref_len else math.exp(1.0 - ref_len / hyp_len)
    return bp * math.exp(log_precision)


def levenshtein(a: str, b: str) -> int:
    """Character-level edit distance, two-row dynamic program."""
    if len(a) < len(b):
        a, b = b, a
    if not b:
        return len(a)
    previous = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        current = [i]
        for j, cb in enumerate(b, start=1):
            current.append(
                min(
                    previous[j] + 1,          # deletion
                    current[j - 1] + 1,       # insertion
                    previous[j - 1] + (ca != cb),  # substitution / match
                )
            )
        previous = current
    return previous[-1]


def norm_edit_distance(reference: str, hypothesis: str) -> float:
    """Levenshtein distance over max length; 0.0 when both strings empty."""
    longest = max(len(reference), len(hypothesis))
    if longest == 0:
        return 0.0
    return levenshtein(reference, hypothesis) / longest


def oc_rate(records: Iterable[EvalRecord]) -> float:
    """Fraction of records with at least one positive component delta."""
    recs = list(records)
    if not recs:
        raise EmptyInput("no records")
    with_event = sum(1 for r in recs if any(d > 0 for d in r.deltas))
    return with_event / len(recs)


def oc_magnitude_histogram(records: Iterable[EvalRecord]) -> dict:
    """Event-delta counts in the four bins (0,5], (5,10], (10,15], (15,20].

    Left-open / right-closed edges partition the integer deltas 1..20, so
    a delta of exactly 5 lands in (0,5] and exactly 10 in (5,10].
    """
    counts = [0, 0, 0, 0]
    for rec in records:
        for d in rec.deltas:
            if d <= 0:
                continue
            for i, (lo, hi) in enumerate(OC_BINS):
                if lo < d <= hi:
                    counts[i] += 1
                    break
    total = sum(counts)
    percentages = [100.0 * c / total if total else 0.0 for c in counts]
    return {
        "bins": [f"({lo},{hi}]" for lo, hi in OC_BINS],
        "counts": counts,
        "percentages": percentages,
        "total_events": total,
    }


@dataclass
class ModelAggregate:
    """Per-model summary backing one leaderboard row."""

    model_id: str
    pink: float
    bleu: float
    norm_edit_distance: float
    oc_rate: float
    oc_histogram: dict = field(default_factory=dict)
    n_samples: int = 0
    mean_oracle: float = 0.0
    mean_model_total: float = 0.0
    mean_penalized_total: float = 0.0

    def to_json_dict(self) -> dict:
        return {
            "model_id": self.model_id,
            "pink": self.pink,
            "bleu": self.bleu,
            "norm_edit_distance": self.norm_edit_distance,
            "oc_rate": self.oc_rate,
            "oc_histogram": self.oc_histogram,
            "n_samples": self.n_samples,
            "mean_oracle": self.mean_oracle,
            "mean_model_total": self.mean_model_total,
            "mean_penalized_total": self.mean_penalized_total,
        }


def aggregate_model(
    model_id: str,
    records: Sequence[EvalRecord],
    text_pairs: Sequence[tuple[str, str]],
    bleu_mode: str = "corpus",
) -> ModelAggregate:
    """Build one model's aggregate from its records and (gt, ocr) text pairs."""
    recs = sorted(records, key=lambda r: (r.sample_id, r.judge_id, r.run_index))
    if not recs:
        raise EmptyInput(f"no records for model {model_id}")
    ned = (
        math.fsum(norm_edit_distance(ref, hyp) for ref, hyp in text_pairs) / len(text_pairs)
        if text_pairs
        else 0.0
    )
    return ModelAggregate(
        model_id=model_id,
        pink=pink_score(recs),
        bleu=bleu(text_pairs, mode=bleu_mode) if text_pairs else 0.0,
        norm_edit_distance=ned,
        oc_rate=oc_rate(recs),
        oc_histogram=oc_magnitude_histogram(recs),
        n_samples=len(recs),
        mean_oracle=math.fsum(r.oracle.total for r in recs) / len(recs),
        mean_model_total=math.fsum(r.model.total for r in recs) / len(recs),
        mean_penalized_total=math.fsum(r.penalized_total for r in recs) / len(recs),
    )
