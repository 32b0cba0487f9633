"""Ranking quality metrics with binary relevance."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


class MetricError(ValueError):
    def __init__(self, reason: str, detail: str = ""):
        super().__init__(reason, detail)
        self.reason = reason


@dataclass
class RankedList:
    ids: list
    scores: list

    def __post_init__(self):
        if len(self.ids) != len(self.scores):
            raise ValueError("ids and scores must align")
        if len(set(self.ids)) != len(self.ids):
            raise ValueError("ranked ids must be unique")
        for a, b in zip(self.scores, self.scores[1:]):
            if b > a:
                raise ValueError("scores must be non-increasing")


def rank_by_score(ids, scores) -> RankedList:
    """Descending score; ties broken by ascending position in ``ids``."""
    scores = np.asarray(scores, dtype=np.float64)
    order = np.argsort(-scores, kind="stable")
    return RankedList(ids=[ids[i] for i in order], scores=[float(scores[i]) for i in order])


def ranking_metrics(ranked_ids, relevant, n: int) -> dict:
    """NDCG/MAP/Precision/Recall at n for one ranked list.

    NDCG uses log2 discounts; MAP is the truncated form, normalized by
    min(|relevant|, n).
    """
    if n < 1:
        raise MetricError("bad-n", "cutoff must be at least 1")
    relevant = set(relevant)
    if not relevant:
        raise MetricError("no-relevant")
    top = list(ranked_ids)[:n]
    hits = 0
    dcg = 0.0
    ap = 0.0
    for rank, item in enumerate(top, start=1):
        if item in relevant:
            hits += 1
            dcg += 1.0 / math.log2(rank + 1)
            ap += hits / rank
    ideal_hits = min(len(relevant), n)
    idcg = sum(1.0 / math.log2(r + 1) for r in range(1, ideal_hits + 1))
    return {
        "ndcg": dcg / idcg if idcg > 0 else 0.0,
        "map": ap / ideal_hits,
        "precision": hits / n,
        "recall": hits / len(relevant),
    }


def f_map(before_ids, after_ids, affected, n: int) -> float:
    """MAP@n drop of the affected items: before minus after.

    Positive means the affected items fell down the list.
    """
    affected = set(affected)
    if not affected:
        raise MetricError("no-affected")
    b = ranking_metrics(before_ids, affected, n)["map"]
    a = ranking_metrics(after_ids, affected, n)["map"]
    return b - a


@dataclass
class PreferencePair:
    true_a: float
    true_b: float
    score_a: float
    score_b: float

    @property
    def delta(self) -> float:
        return abs(self.true_a - self.true_b)


def kendall_tau_delta(pairs, delta_min: float) -> float:
    """Rank correlation over pairs whose true-rating gap is at least delta_min.

    A model-score tie splits its weight between concordant and discordant
    (half each), so ties pull the value toward zero and reversing every
    score exactly negates the result. Pairs with equal true ratings never
    qualify (their gap is 0 < delta_min required... they qualify only when
    delta_min <= 0, in which case order carries no signal and they are
    skipped).
    """
    concordant = 0.0
    discordant = 0.0
    total = 0
    for p in pairs:
        if p.delta < delta_min or p.true_a == p.true_b:
            continue
        total += 1
        true_dir = 1.0 if p.true_a > p.true_b else -1.0
        diff = p.score_a - p.score_b
        if diff == 0:
            concordant += 0.5
            discordant += 0.5
        elif (diff > 0) == (true_dir > 0):
            concordant += 1.0
        else:
            discordant += 1.0
    if total == 0:
        raise MetricError("no-pairs")
    return (concordant - discordant) / total
