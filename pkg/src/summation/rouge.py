"""Self-contained ROUGE-1/2/L scorer.

Tokens are case-folded and never stemmed. Multi-reference inputs score
the candidate against each reference separately and take the max per
component (recall, precision), with f1 the harmonic mean of those
maxima; growing a candidate therefore never lowers its recall. The
limited-length protocol truncates the candidate to its first
``word_limit`` tokens before scoring; 75 is the default.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

VARIANTS = ("R1", "R2", "RL")


@dataclass(frozen=True)
class RougeScore:
    recall: float
    precision: float
    f1: float
    variant: str


def _f1(recall: float, precision: float) -> float:
    if recall + precision == 0.0:
        return 0.0
    return 2.0 * recall * precision / (recall + precision)


def _ngrams(tokens, n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def _ngram_scores(cand, ref, n: int):
    cand_counts = _ngrams(cand, n)
    ref_counts = _ngrams(ref, n)
    overlap = sum(
        min(count, ref_counts[gram]) for gram, count in cand_counts.items()
    )
    cand_total = sum(cand_counts.values())
    ref_total = sum(ref_counts.values())
    recall = overlap / ref_total if ref_total else 0.0
    precision = overlap / cand_total if cand_total else 0.0
    return recall, precision


def _lcs_length(a, b) -> int:
    if not a or not b:
        return 0
    prev = [0] * (len(b) + 1)
    for x in a:
        cur = [0]
        for j, y in enumerate(b, start=1):
            if x == y:
                cur.append(prev[j - 1] + 1)
            else:
                cur.append(max(prev[j], cur[j - 1]))
        prev = cur
    return prev[-1]


def _lcs_scores(cand, ref):
    lcs = _lcs_length(cand, ref)
    recall = lcs / len(ref) if ref else 0.0
    precision = lcs / len(cand) if cand else 0.0
    return recall, precision


def rouge_score(
    candidate,
    references,
    variant: str = "R1",
    word_limit: int | None = 75,
) -> RougeScore:
    """Score a candidate token list against reference token lists."""
    if variant not in VARIANTS:
        raise ValueError(f"variant must be one of {VARIANTS}, got {variant!r}")
    cand = [t.lower() for t in candidate]
    if word_limit is not None:
        if word_limit < 0:
            raise ValueError("word_limit must be >= 0")
        cand = cand[:word_limit]
    refs = [[t.lower() for t in ref] for ref in references if ref]

    best_recall, best_precision = 0.0, 0.0
    for ref in refs:
        if variant == "RL":
            recall, precision = _lcs_scores(cand, ref)
        else:
            n = 1 if variant == "R1" else 2
            recall, precision = _ngram_scores(cand, ref, n)
        best_recall = max(best_recall, recall)
        best_precision = max(best_precision, precision)
    return RougeScore(
        recall=best_recall,
        precision=best_precision,
        f1=_f1(best_recall, best_precision),
        variant=variant,
    )
