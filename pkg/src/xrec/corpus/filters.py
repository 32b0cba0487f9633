"""Turning raw marker spans into usable justifications."""

from __future__ import annotations

from dataclasses import dataclass, field

from .text import FUNCTION_WORDS, PRONOUN_STOPLIST
from .types import Justification, Review


@dataclass(frozen=True)
class FilterRules:
    min_tokens: int = 4
    pronoun_stoplist: frozenset[str] = PRONOUN_STOPLIST
    # phrase-hood proxy: at least one token outside the function-word list
    function_words: frozenset[str] = FUNCTION_WORDS


@dataclass
class RejectedSpan:
    span: tuple[str, int, int]
    reason: str  # invalid-span | too-short | pronoun | no-content


@dataclass
class FilterResult:
    kept: list[Justification] = field(default_factory=list)
    rejected: list[RejectedSpan] = field(default_factory=list)


def filter_markers(review: Review, rules: FilterRules | None = None) -> FilterResult:
    """Keep marker spans that can stand alone as justifications.

    A span survives when it is in range, has at least ``min_tokens`` tokens,
    contains no stoplisted pronoun, and has at least one content token.
    Order of surviving spans follows the review; bad spans never abort the
    review, they are reported with a reason code.
    """
    rules = rules or FilterRules()
    result = FilterResult()
    n = len(review.tokens)
    for span in review.marker_spans:
        aspect, start, end = span
        if not (0 <= start < end <= n):
            result.rejected.append(RejectedSpan(span, "invalid-span"))
            continue
        tokens = review.tokens[start:end]
        if len(tokens) < rules.min_tokens:
            result.rejected.append(RejectedSpan(span, "too-short"))
            continue
        if any(t in rules.pronoun_stoplist for t in tokens):
            result.rejected.append(RejectedSpan(span, "pronoun"))
            continue
        if not any(t not in rules.function_words and any(c.isalpha() for c in t) for t in tokens):
            result.rejected.append(RejectedSpan(span, "no-content"))
            continue
        result.kept.append(
            Justification(tokens=tuple(tokens), aspect=aspect, source_review=review.review_id)
        )
    return result
