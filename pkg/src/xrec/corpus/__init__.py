from .dataset import Dataset, build_dataset, pick_targets
from .filters import FilterResult, FilterRules, filter_markers
from .history import build_history
from .io import (
    read_ground_truth,
    read_reviews,
    read_split,
    read_vocab,
    write_ground_truth,
    write_reviews,
    write_split,
    write_vocab,
)
from .keyphrases import mine_keyphrases, vectorize_keyphrases
from .split import binarize_rating, split_corpus
from .synthetic import SyntheticConfig, SyntheticGroundTruth, generate_synthetic_corpus
from .text import lemmatize, lemmatize_all, tokenize
from .types import (
    CorpusError,
    Interaction,
    Justification,
    JustificationReference,
    KeyphraseVocabulary,
    Review,
)

__all__ = [
    "Dataset",
    "build_dataset",
    "pick_targets",
    "FilterResult",
    "FilterRules",
    "filter_markers",
    "build_history",
    "read_ground_truth",
    "read_reviews",
    "read_split",
    "read_vocab",
    "write_ground_truth",
    "write_reviews",
    "write_split",
    "write_vocab",
    "mine_keyphrases",
    "vectorize_keyphrases",
    "binarize_rating",
    "split_corpus",
    "SyntheticConfig",
    "SyntheticGroundTruth",
    "generate_synthetic_corpus",
    "lemmatize",
    "lemmatize_all",
    "tokenize",
    "CorpusError",
    "Interaction",
    "Justification",
    "JustificationReference",
    "KeyphraseVocabulary",
    "Review",
]
