"""Tokenization, lemmatization, and the stoplists used across the corpus pipeline.

Everything here is deterministic and dependency-free; the lemmatizer is a
small suffix stripper backed by an exception table, which is enough for the
review-style unigrams we mine.
"""

from __future__ import annotations

import re

# First and third-person pronouns that disqualify a marker from becoming a
# justification.
PRONOUN_STOPLIST = frozenset(
    {
        "i", "me", "my", "mine", "we", "us", "our",
        "he", "she", "him", "her", "his", "hers",
        "they", "them", "their",
    }
)

# Function words used as a phrase-hood proxy: a marker must contain at least
# one token outside this set to count as a content phrase.
FUNCTION_WORDS = frozenset(
    {
        "a", "an", "the", "and", "or", "but", "if", "then", "so", "as",
        "of", "in", "on", "at", "to", "for", "with", "from", "by", "about",
        "into", "over", "after", "before", "between", "out", "up", "down",
        "is", "was", "were", "are", "be", "been", "being", "am",
        "do", "does", "did", "have", "has", "had",
        "will", "would", "can", "could", "should", "may", "might", "must",
        "not", "no", "nor", "too", "very", "just", "there", "here",
        "far", "near", "also", "quite", "really",
        "this", "that", "these", "those", "it", "its",
        "i", "me", "my", "we", "us", "our", "you", "your",
        "he", "she", "him", "her", "his", "they", "them", "their",
        ".", ",", "!", "?", ";", ":", "'", '"', "-", "(", ")",
    }
)

_TOKEN_RE = re.compile(r"[a-z0-9]+(?:'[a-z]+)?|[^\sa-z0-9]")

# Irregular forms the suffix rules would mangle.
_LEMMA_EXCEPTIONS = {
    "was": "was",
    "has": "has",
    "is": "is",
    "its": "its",
    "this": "this",
    "his": "his",
    "hers": "hers",
    "us": "us",
    "gas": "gas",
    "bus": "bus",
    "yes": "yes",
    "less": "less",
    "glass": "glass",
    "class": "class",
    "grass": "grass",
    "bed": "bed",
    "red": "red",
    "pricing": "price",
    "better": "better",
    "breakfast": "breakfast",
    "staff": "staff",
    "business": "business",
    "delicious": "delicious",
    "spacious": "spacious",
    "famous": "famous",
    "gorgeous": "gorgeous",
    "previous": "previous",
    "various": "various",
    "serious": "serious",
    "obvious": "obvious",
    "king": "king",
    "sparkling": "sparkling",
    "ceiling": "ceiling",
    "building": "building",
    "morning": "morning",
    "evening": "evening",
    "wedding": "wedding",
    "pudding": "pudding",
    "during": "during",
    "thing": "thing",
    "something": "something",
    "nothing": "nothing",
    "everything": "everything",
    "anything": "anything",
    "amazing": "amazing",
    "boring": "boring",
    "outstanding": "outstanding",
    "charming": "charming",
    "stunning": "stunning",
    "welcoming": "welcoming",
    "need": "need",
    "speed": "speed",
    "feed": "feed",
    "indeed": "indeed",
    "tired": "tired",
    "hundred": "hundred",
}


def tokenize(text: str) -> list[str]:
    """Lowercase and split on whitespace/punctuation boundaries.

    Punctuation characters are kept as their own tokens so marker spans keep
    their original token arithmetic.
    """
    return _TOKEN_RE.findall(text.lower())


def lemmatize(token: str) -> str:
    """Strip plural/-ing/-ed suffixes with a small exception table."""
    if token in _LEMMA_EXCEPTIONS:
        return _LEMMA_EXCEPTIONS[token]
    if len(token) > 4 and token.endswith("ies"):
        return token[:-3] + "y"
    if len(token) > 3 and token.endswith("es") and not token.endswith("ss"):
        # boxes -> box, places -> place: keep the e when the stem would end
        # in a consonant cluster that needed it
        stem = token[:-2]
        if stem.endswith(("sh", "ch", "x", "z", "s")):
            return stem
        return token[:-1]
    if len(token) > 3 and token.endswith("s") and not token.endswith("ss"):
        return token[:-1]
    if len(token) > 5 and token.endswith("ing"):
        stem = token[:-3]
        if len(stem) > 2 and stem[-1] == stem[-2]:  # swimming -> swim
            stem = stem[:-1]
        return stem
    if len(token) > 4 and token.endswith("ed"):
        stem = token[:-2]
        if len(stem) > 2 and stem[-1] == stem[-2]:  # stopped -> stop
            stem = stem[:-1]
        return stem
    return token


def lemmatize_all(tokens: list[str]) -> list[str]:
    return [lemmatize(t) for t in tokens]


def is_content_token(token: str) -> bool:
    return token not in FUNCTION_WORDS and any(c.isalpha() for c in token)
