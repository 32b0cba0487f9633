"""End-to-end assembly: corpus files -> dataset -> tensors -> trained model.

The checkpoint header records everything needed to rebuild the serving
state from the corpus directory: corpus options (seed, threshold,
history size), the token vocabulary, the keyphrase vocabulary, and the
user/item catalogs. ``restore`` replays that recipe and cross-checks the
result against the header so a stale or swapped corpus directory fails
loudly instead of silently misindexing.
"""

from __future__ import annotations

import os
from dataclasses import asdict, dataclass

import numpy as np

from ..corpus import (
    FilterRules,
    KeyphraseVocabulary,
    SyntheticConfig,
    build_dataset,
    generate_synthetic_corpus,
    mine_keyphrases,
    read_reviews,
    read_split,
    read_vocab,
    split_corpus,
    write_ground_truth,
    write_reviews,
    write_split,
    write_vocab,
)
from ..model import (
    HyperParams,
    Network,
    TokenVocab,
    build_corpus_tensors,
    build_token_vocab,
)


@dataclass
class CorpusOptions:
    """Dataset-shaping knobs that must replay identically at serve time."""

    seed: int = 0
    threshold: float = 3.0
    n_just: int = 8
    min_interactions: int = 20
    train_fraction: float = 0.8
    keyphrases_per_aspect: int = 6

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, doc: dict) -> "CorpusOptions":
        return cls(**doc)


@dataclass
class PreparedCorpus:
    dataset: object
    token_vocab: TokenVocab
    tensors: object
    vocab: KeyphraseVocabulary


def synthesize_corpus_dir(cfg: SyntheticConfig, out_dir: str, opts: CorpusOptions) -> dict:
    """Generate a synthetic corpus and write the standard artifact files."""
    os.makedirs(out_dir, exist_ok=True)
    reviews, truth = generate_synthetic_corpus(cfg)
    split = split_corpus(reviews, opts.min_interactions, opts.train_fraction)
    train = [r for r in reviews if split[r.review_id] == "train"]
    vocab = mine_keyphrases(train, opts.keyphrases_per_aspect, FilterRules())
    paths = {
        "corpus": os.path.join(out_dir, "corpus.jsonl"),
        "keyphrases": os.path.join(out_dir, "keyphrases.jsonl"),
        "split": os.path.join(out_dir, "split.jsonl"),
        "ground_truth": os.path.join(out_dir, "ground_truth.json"),
    }
    write_reviews(paths["corpus"], reviews)
    write_vocab(paths["keyphrases"], vocab)
    write_split(paths["split"], split)
    write_ground_truth(paths["ground_truth"], truth)
    return paths


def load_corpus_dir(corpus_dir: str):
    reviews = read_reviews(os.path.join(corpus_dir, "corpus.jsonl"))
    vocab = read_vocab(os.path.join(corpus_dir, "keyphrases.jsonl"))
    split = read_split(os.path.join(corpus_dir, "split.jsonl"))
    return reviews, vocab, split


def prepare_corpus(corpus_dir: str, opts: CorpusOptions, max_just_len: int) -> PreparedCorpus:
    reviews, vocab, split = load_corpus_dir(corpus_dir)
    dataset = build_dataset(reviews, split, vocab, opts.threshold, opts.n_just, opts.seed)
    token_vocab = build_token_vocab(dataset)
    tensors = build_corpus_tensors(dataset, token_vocab, max_just_len)
    return PreparedCorpus(dataset=dataset, token_vocab=token_vocab, tensors=tensors, vocab=vocab)


def checkpoint_header(prepared: PreparedCorpus, opts: CorpusOptions) -> dict:
    return {
        "corpus": opts.to_dict(),
        "token_vocab": list(prepared.token_vocab.tokens),
        "keyphrases": [list(entry) for entry in prepared.vocab.entries],
        "users": list(prepared.tensors.users),
        "items": list(prepared.tensors.items),
    }


def build_network(prepared: PreparedCorpus, hyper: HyperParams, seed: int) -> Network:
    ct = prepared.tensors
    return Network(
        hyper,
        n_tokens=len(prepared.token_vocab),
        n_users=len(ct.users),
        n_items=len(ct.items),
        kp_token_rows=ct.kp_token_rows,
        seed=seed,
    )


def restore(checkpoint_path: str, corpus_dir: str):
    """Load a checkpoint and rebuild its serving state from the corpus dir."""
    net, header = Network.load(checkpoint_path)
    opts = CorpusOptions.from_dict(header["corpus"])
    prepared = prepare_corpus(corpus_dir, opts, net.hyper.max_just_len)
    if list(prepared.token_vocab.tokens) != header["token_vocab"]:
        raise ValueError("token vocabulary rebuilt from the corpus does not match the checkpoint")
    if [list(e) for e in prepared.vocab.entries] != header["keyphrases"]:
        raise ValueError("keyphrase vocabulary does not match the checkpoint")
    if list(prepared.tensors.users) != header["users"] or list(prepared.tensors.items) != header["items"]:
        raise ValueError("user/item catalogs do not match the checkpoint")
    kp_rows = np.asarray(header["kp_token_rows"], dtype=np.int64)
    if kp_rows.shape != prepared.tensors.kp_token_rows.shape or (
        kp_rows != prepared.tensors.kp_token_rows
    ).any():
        raise ValueError("keyphrase token rows do not match the checkpoint")
    return net, prepared, header
