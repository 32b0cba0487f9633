"""Rating binarization and the per-user chronological split."""

from __future__ import annotations

from collections import defaultdict

from .types import CorpusError, Review


def binarize_rating(rating: float, threshold: float) -> int:
    """1 iff rating is strictly above the threshold."""
    return 1 if rating > threshold else 0


def split_corpus(
    reviews: list[Review],
    min_interactions: int = 20,
    train_fraction: float = 0.8,
) -> dict[str, str]:
    """Assign each retained review to train/valid/test.

    Users with fewer than ``min_interactions`` reviews are dropped entirely.
    Per user (sorted by timestamp, review_id as a stable tie-break) the first
    floor(train_fraction * n) reviews are train; the remainder is split
    evenly between valid and test, an odd leftover going to test.
    """
    if not 0 < train_fraction < 1:
        raise ValueError("train_fraction must be in (0, 1)")
    by_user: dict[str, list[Review]] = defaultdict(list)
    for review in reviews:
        by_user[review.user_id].append(review)
    assignment: dict[str, str] = {}
    for user, user_reviews in by_user.items():
        if len(user_reviews) < min_interactions:
            continue
        user_reviews.sort(key=lambda r: (r.timestamp, r.review_id))
        n = len(user_reviews)
        n_train = int(train_fraction * n)
        rest = n - n_train
        n_valid = rest // 2
        for i, review in enumerate(user_reviews):
            if i < n_train:
                assignment[review.review_id] = "train"
            elif i < n_train + n_valid:
                assignment[review.review_id] = "valid"
            else:
                assignment[review.review_id] = "test"
    if not assignment:
        raise CorpusError("empty-corpus", "no users with enough interactions")
    return assignment
