"""Corpus preparation, training pipelines, evaluation, and critique
experiments."""

from .baselines import global_mean_rating, keyphrase_popularity_order
from .drivers import run_fmap_experiment, run_multistep_experiment
from .evaluate import (
    justification_eval,
    keyphrase_eval,
    leave_one_out,
    rating_rank_correlation,
)
from .pipeline import (
    CorpusOptions,
    PreparedCorpus,
    build_network,
    checkpoint_header,
    load_corpus_dir,
    prepare_corpus,
    restore,
    synthesize_corpus_dir,
)
from .reports import format_summary, read_report, write_report

__all__ = [
    "CorpusOptions",
    "PreparedCorpus",
    "build_network",
    "checkpoint_header",
    "format_summary",
    "global_mean_rating",
    "justification_eval",
    "keyphrase_eval",
    "keyphrase_popularity_order",
    "leave_one_out",
    "load_corpus_dir",
    "prepare_corpus",
    "rating_rank_correlation",
    "read_report",
    "restore",
    "run_fmap_experiment",
    "run_multistep_experiment",
    "synthesize_corpus_dir",
    "write_report",
]
