"""Assembles reviews + split + vocabulary into model-ready interactions."""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field

from .filters import FilterRules, filter_markers
from .history import build_history
from .keyphrases import vectorize_keyphrases
from .split import binarize_rating
from .types import Interaction, Justification, JustificationReference, KeyphraseVocabulary, Review


@dataclass
class Dataset:
    users: list[str]
    items: list[str]
    interactions: list[Interaction]
    user_histories: dict[str, JustificationReference]
    item_histories: dict[str, JustificationReference]
    vocab: KeyphraseVocabulary
    dropped_cold_items: list[str] = field(default_factory=list)

    def by_split(self, split: str) -> list[Interaction]:
        return [x for x in self.interactions if x.split == split]


def pick_targets(justs: list[Justification], limit: int = 2) -> list[tuple[str, ...]]:
    """Up to ``limit`` decoder targets per review: the longest markers,
    ties broken lexicographically."""
    ranked = sorted(justs, key=lambda j: (-len(j.tokens), j.tokens))
    return [j.tokens for j in ranked[:limit]]


def build_dataset(
    reviews: list[Review],
    split: dict[str, str],
    vocab: KeyphraseVocabulary,
    threshold: float,
    n_just: int,
    seed: int,
    rules: FilterRules | None = None,
) -> Dataset:
    """Materialize interactions and sampled histories from corpus artifacts.

    Items with no training-split justifications are cold and get dropped
    along with their held-out interactions (cold-start handling is out of
    scope); they are reported in ``dropped_cold_items``.
    """
    rules = rules or FilterRules()
    retained = [r for r in reviews if r.review_id in split]

    user_pools: dict[str, list[Justification]] = defaultdict(list)
    item_pools: dict[str, list[Justification]] = defaultdict(list)
    justs_by_review: dict[str, list[Justification]] = {}
    for review in retained:
        kept = filter_markers(review, rules).kept
        justs_by_review[review.review_id] = kept
        if split[review.review_id] == "train":
            user_pools[review.user_id].extend(kept)
            item_pools[review.item_id].extend(kept)

    users = sorted({r.user_id for r in retained if user_pools[r.user_id]})
    warm_items = sorted({r.item_id for r in retained if item_pools[r.item_id]})
    warm = set(warm_items)
    known_users = set(users)
    dropped = sorted({r.item_id for r in retained} - warm)

    interactions = [
        Interaction(
            user_id=r.user_id,
            item_id=r.item_id,
            review_id=r.review_id,
            timestamp=r.timestamp,
            label=binarize_rating(r.overall_rating, threshold),
            keyphrase_vector=vectorize_keyphrases(r.tokens, vocab),
            target_justifications=pick_targets(justs_by_review[r.review_id]),
            split=split[r.review_id],
        )
        for r in retained
        if r.item_id in warm and r.user_id in known_users
    ]

    user_histories = {u: build_history(u, user_pools[u], n_just, seed) for u in users}
    item_histories = {i: build_history(i, item_pools[i], n_just, seed) for i in warm_items}

    return Dataset(
        users=users,
        items=warm_items,
        interactions=interactions,
        user_histories=user_histories,
        item_histories=item_histories,
        vocab=vocab,
        dropped_cold_items=dropped,
    )
