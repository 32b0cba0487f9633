from .bws import BwsCounts, bws_score
from .ranking import (
    MetricError,
    PreferencePair,
    RankedList,
    f_map,
    kendall_tau_delta,
    rank_by_score,
    ranking_metrics,
)
from .textgen import bleu_scores, r_kw, rouge_l, text_overlap

__all__ = [
    "BwsCounts",
    "MetricError",
    "PreferencePair",
    "RankedList",
    "bleu_scores",
    "bws_score",
    "f_map",
    "kendall_tau_delta",
    "r_kw",
    "rank_by_score",
    "ranking_metrics",
    "rouge_l",
    "text_overlap",
]
