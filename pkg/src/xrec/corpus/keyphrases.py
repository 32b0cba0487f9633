"""Keyphrase vocabulary mining and per-review occurrence vectors."""

from __future__ import annotations

from collections import Counter

from .filters import FilterRules, filter_markers
from .text import is_content_token, lemmatize
from .types import CorpusError, KeyphraseVocabulary, Review


def mine_keyphrases(
    training_reviews: list[Review],
    k_per_aspect: int,
    rules: FilterRules | None = None,
) -> KeyphraseVocabulary:
    """Pick the top-k content unigrams per aspect from filtered markers.

    Candidates are lemmatized content tokens of each aspect's surviving
    markers, ranked by frequency with lexicographic tie-break.  Every aspect
    contributes exactly ``k_per_aspect`` entries so the vocabulary stays
    uniform over aspects.
    """
    if k_per_aspect < 1:
        raise ValueError("k_per_aspect must be >= 1")
    counts: dict[str, Counter] = {}
    aspects: list[str] = []
    for review in training_reviews:
        for aspect in review.aspect_ratings:
            if aspect not in counts:
                counts[aspect] = Counter()
                aspects.append(aspect)
        for just in filter_markers(review, rules).kept:
            counter = counts.setdefault(just.aspect, Counter())
            if just.aspect not in aspects:
                aspects.append(just.aspect)
            for token in just.tokens:
                if is_content_token(token):
                    counter[lemmatize(token)] += 1
    if not aspects:
        raise CorpusError("insufficient-vocabulary", "no aspects present")
    entries: list[tuple[str, str]] = []
    for aspect in aspects:
        counter = counts.get(aspect, Counter())
        if len(counter) < k_per_aspect:
            raise CorpusError("insufficient-vocabulary", aspect)
        top = sorted(counter.items(), key=lambda kv: (-kv[1], kv[0]))[:k_per_aspect]
        entries.extend((phrase, aspect) for phrase, _ in top)
    return KeyphraseVocabulary(entries=tuple(entries))


def vectorize_keyphrases(tokens: list[str], vocab: KeyphraseVocabulary) -> list[int]:
    """Bit k is 1 iff entry k's lemma occurs among the lemmatized tokens."""
    if len(vocab) == 0:
        raise ValueError("empty vocabulary")
    lemmas = {lemmatize(t) for t in tokens}
    return [1 if phrase in lemmas else 0 for phrase in vocab.phrases]
