import dataclasses

import numpy as np
import pytest

from xrec.corpus.dataset import build_dataset, pick_targets
from xrec.corpus.filters import FilterRules, filter_markers
from xrec.corpus.history import build_history
from xrec.corpus.io import (
    read_reviews,
    read_split,
    read_vocab,
    write_reviews,
    write_split,
    write_vocab,
)
from xrec.corpus.keyphrases import mine_keyphrases, vectorize_keyphrases
from xrec.corpus.split import binarize_rating, split_corpus
from xrec.corpus.synthetic import SyntheticConfig, generate_synthetic_corpus
from xrec.corpus.text import is_content_token, lemmatize, tokenize
from xrec.corpus.types import CorpusError, Justification, KeyphraseVocabulary, Review


def make_review(rid, user, item, ts, rating, tokens, spans, aspects=("food", "service")):
    return Review(
        review_id=rid,
        user_id=user,
        item_id=item,
        timestamp=ts,
        overall_rating=rating,
        aspect_ratings={a: rating for a in aspects},
        tokens=tokens,
        marker_spans=spans,
    )


# -------------------------------------------------------------------- text


def test_tokenize_lowercases_and_splits_punctuation():
    assert tokenize("The room, was GREAT!") == ["the", "room", ",", "was", "great", "!"]


def test_tokenize_keeps_apostrophe_words():
    assert tokenize("didn't work") == ["didn't", "work"]


def test_lemmatize_suffix_rules():
    assert lemmatize("rooms") == "room"
    assert lemmatize("amenities") == "amenity"
    assert lemmatize("boxes") == "box"
    assert lemmatize("places") == "place"
    assert lemmatize("swimming") == "swim"
    assert lemmatize("stopped") == "stop"
    assert lemmatize("cleaned") == "clean"


def test_lemmatize_exceptions_and_short_tokens():
    assert lemmatize("staff") == "staff"
    assert lemmatize("was") == "was"
    assert lemmatize("glass") == "glass"
    assert lemmatize("gas") == "gas"
    assert lemmatize("bed") == "bed"


def test_is_content_token():
    assert is_content_token("pasta")
    assert not is_content_token("the")
    assert not is_content_token(",")
    assert not is_content_token("123")


# ------------------------------------------------------------------ filters


def test_filter_markers_keeps_good_span():
    review = make_review(
        "r1", "u1", "i1", 0, 4.0,
        tokens="the pasta was delicious .".split(),
        spans=[("food", 0, 5)],
    )
    result = filter_markers(review)
    assert len(result.kept) == 1
    just = result.kept[0]
    assert just.tokens == ("the", "pasta", "was", "delicious", ".")
    assert just.aspect == "food"
    assert just.source_review == "r1"
    assert result.rejected == []


def test_filter_markers_reason_codes():
    tokens = "i loved it . ok fine . the staff was kind".split()
    review = make_review(
        "r2", "u1", "i1", 0, 4.0,
        tokens=tokens,
        spans=[
            ("food", 0, 4),     # pronoun "i"
            ("food", 4, 6),     # only 2 tokens
            ("food", 3, 99),    # out of range
            ("service", 7, 11), # kept
        ],
    )
    result = filter_markers(review)
    reasons = [r.reason for r in result.rejected]
    assert reasons == ["pronoun", "too-short", "invalid-span"]
    assert [j.aspect for j in result.kept] == ["service"]


def test_filter_markers_requires_content():
    review = make_review(
        "r3", "u1", "i1", 0, 4.0,
        tokens="it was very . so !".split(),
        spans=[("food", 0, 6)],
    )
    result = filter_markers(review)
    assert result.kept == []
    assert result.rejected[0].reason == "no-content"


def test_filter_markers_min_tokens_rule():
    review = make_review(
        "r4", "u1", "i1", 0, 4.0,
        tokens="nice pool area here".split(),
        spans=[("food", 0, 4)],
    )
    assert len(filter_markers(review, FilterRules(min_tokens=4)).kept) == 1
    assert len(filter_markers(review, FilterRules(min_tokens=5)).kept) == 0


# ------------------------------------------------------------------- mining


def _mining_corpus():
    rows = [
        ("m1", "the pasta was delicious .", "the waiter was rude ."),
        ("m2", "the pasta was bland .", "the staff was kind ."),
        ("m3", "the soup was delicious .", "the waiter was kind ."),
    ]
    reviews = []
    for rid, food_text, service_text in rows:
        tokens = food_text.split() + service_text.split()
        cut = len(food_text.split())
        reviews.append(
            make_review(rid, "u1", "i1", 0, 4.0, tokens,
                        [("food", 0, cut), ("service", cut, len(tokens))])
        )
    return reviews


def test_mine_keyphrases_frequency_then_lexicographic():
    vocab = mine_keyphrases(_mining_corpus(), k_per_aspect=2)
    # food counts: delicious 2, pasta 2, bland 1, soup 1
    # service counts: kind 2, waiter 2, rude 1, staff 1
    assert vocab.entries == (
        ("delicious", "food"),
        ("pasta", "food"),
        ("kind", "service"),
        ("waiter", "service"),
    )


def test_mine_keyphrases_insufficient_vocabulary():
    with pytest.raises(CorpusError) as err:
        mine_keyphrases(_mining_corpus(), k_per_aspect=10)
    assert err.value.reason == "insufficient-vocabulary"
    with pytest.raises(ValueError):
        mine_keyphrases(_mining_corpus(), k_per_aspect=0)


def test_vectorize_keyphrases_lemma_match():
    vocab = mine_keyphrases(_mining_corpus(), k_per_aspect=2)
    bits = vectorize_keyphrases("the pastas were delicious".split(), vocab)
    assert bits == [1, 1, 0, 0]
    bits = vectorize_keyphrases("kind waiters everywhere".split(), vocab)
    assert bits == [0, 0, 1, 1]
    with pytest.raises(ValueError):
        vectorize_keyphrases(["x"], KeyphraseVocabulary(entries=()))


def test_vocabulary_rejects_duplicates():
    with pytest.raises(ValueError):
        KeyphraseVocabulary(entries=(("a", "x"), ("a", "x")))


# -------------------------------------------------------------------- split


def test_binarize_rating_strictly_above():
    assert binarize_rating(3.0, 3.0) == 0
    assert binarize_rating(3.01, 3.0) == 1
    assert binarize_rating(1.0, 3.0) == 0


def _user_reviews(user, n, start_ts=0):
    return [
        make_review(f"{user}-r{k}", user, f"i{k}", start_ts + k, 4.0, ["a"], [])
        for k in range(n)
    ]


def test_split_corpus_fractions_and_remainder():
    reviews = _user_reviews("u1", 10)
    split = split_corpus(reviews, min_interactions=5, train_fraction=0.8)
    tags = [split[f"u1-r{k}"] for k in range(10)]
    assert tags == ["train"] * 8 + ["valid", "test"]

    reviews = _user_reviews("u2", 11)
    split = split_corpus(reviews, min_interactions=5, train_fraction=0.8)
    tags = [split[f"u2-r{k}"] for k in range(11)]
    # 8 train, remainder 3: valid gets 1, the odd leftover goes to test
    assert tags == ["train"] * 8 + ["valid", "test", "test"]


def test_split_corpus_orders_by_timestamp_then_id():
    reviews = _user_reviews("u1", 6)
    reviews.reverse()
    for r in reviews:
        r.timestamp = 7  # all tied, review_id breaks ties
    split = split_corpus(reviews, min_interactions=5, train_fraction=0.5)
    tags = [split[f"u1-r{k}"] for k in range(6)]
    assert tags == ["train", "train", "train", "valid", "test", "test"]


def test_split_corpus_drops_sparse_users():
    reviews = _user_reviews("u1", 10) + _user_reviews("u2", 3)
    split = split_corpus(reviews, min_interactions=5)
    assert all(rid.startswith("u1") for rid in split)


def test_split_corpus_errors():
    with pytest.raises(ValueError):
        split_corpus(_user_reviews("u1", 10), train_fraction=1.0)
    with pytest.raises(CorpusError) as err:
        split_corpus(_user_reviews("u1", 3), min_interactions=5)
    assert err.value.reason == "empty-corpus"


# ------------------------------------------------------------------ history


def _pool(n):
    return [
        Justification(tokens=(f"tok{k}", "x", "y", "z"), aspect="food", source_review=f"r{k}")
        for k in range(n)
    ]


def test_build_history_deterministic_and_sized():
    a = build_history("u1", _pool(20), n_just=4, seed=3)
    b = build_history("u1", _pool(20), n_just=4, seed=3)
    assert a == b
    assert len(a.justifications) == 4


def test_build_history_without_replacement_when_possible():
    ref = build_history("u1", _pool(10), n_just=8, seed=0)
    assert len(set(ref.justifications)) == 8


def test_build_history_with_replacement_when_pool_small():
    ref = build_history("u1", _pool(2), n_just=6, seed=0)
    assert len(ref.justifications) == 6
    assert {j.source_review for j in ref.justifications} <= {"r0", "r1"}


def test_build_history_empty_pool():
    with pytest.raises(CorpusError) as err:
        build_history("u1", [], n_just=4, seed=0)
    assert err.value.reason == "no-justifications"


def test_build_history_varies_by_owner():
    pool = _pool(30)
    refs = {owner: build_history(owner, pool, 4, seed=0) for owner in ("u1", "u2", "u3")}
    assert len({r.justifications for r in refs.values()}) > 1


# ------------------------------------------------------------------ dataset


def test_pick_targets_longest_then_lexicographic():
    justs = [
        Justification(("b", "b", "b"), "x", "r"),
        Justification(("a", "a", "a"), "x", "r"),
        Justification(("c", "c", "c", "c"), "x", "r"),
    ]
    assert pick_targets(justs, limit=2) == [("c", "c", "c", "c"), ("a", "a", "a")]


def _dataset_inputs():
    reviews = []
    for u in ("u1", "u2"):
        for k in range(6):
            text = f"the pasta was delicious . the waiter was kind ."
            tokens = text.split()
            reviews.append(
                make_review(f"{u}-r{k}", u, f"i{k % 3}", k, 4.0 if k % 2 else 2.0,
                            tokens, [("food", 0, 5), ("service", 5, 10)])
            )
    split = split_corpus(reviews, min_interactions=3, train_fraction=0.6)
    vocab = mine_keyphrases([r for r in reviews if split[r.review_id] == "train"], 2)
    return reviews, split, vocab


def test_build_dataset_structure():
    reviews, split, vocab = _dataset_inputs()
    ds = build_dataset(reviews, split, vocab, threshold=3.0, n_just=3, seed=0)
    assert ds.users == ["u1", "u2"]
    assert set(ds.items) <= {"i0", "i1", "i2"}
    for inter in ds.interactions:
        assert inter.split == split[inter.review_id]
        assert inter.label in (0, 1)
        assert len(inter.keyphrase_vector) == len(vocab)
        assert 1 <= len(inter.target_justifications) <= 2
    for u in ds.users:
        assert len(ds.user_histories[u].justifications) == 3
    for i in ds.items:
        assert len(ds.item_histories[i].justifications) == 3


def test_build_dataset_drops_cold_items():
    reviews, split, vocab = _dataset_inputs()
    # an item seen only in one user's test slice has no training justifications
    lonely = make_review("u1-r99", "u1", "i-cold", 99, 4.0,
                         "the pasta was delicious .".split(), [("food", 0, 5)])
    reviews.append(lonely)
    split["u1-r99"] = "test"
    ds = build_dataset(reviews, split, vocab, threshold=3.0, n_just=3, seed=0)
    assert "i-cold" in ds.dropped_cold_items
    assert all(inter.item_id != "i-cold" for inter in ds.interactions)


def test_build_dataset_label_binarization():
    reviews, split, vocab = _dataset_inputs()
    ds = build_dataset(reviews, split, vocab, threshold=3.0, n_just=3, seed=0)
    by_id = {r.review_id: r for r in reviews}
    for inter in ds.interactions:
        assert inter.label == (1 if by_id[inter.review_id].overall_rating > 3.0 else 0)


# ---------------------------------------------------------------- synthetic


def test_synthetic_deterministic():
    cfg = SyntheticConfig(n_users=12, n_items=8, reviews_per_user=6, seed=21)
    r1, t1 = generate_synthetic_corpus(cfg)
    r2, t2 = generate_synthetic_corpus(cfg)
    assert r1 == r2
    assert np.array_equal(t1.user_prefs, t2.user_prefs)
    assert np.array_equal(t1.item_quals, t2.item_quals)
    assert np.array_equal(t1.scores, t2.scores)


def test_synthetic_shapes_and_ranges():
    cfg = SyntheticConfig(n_users=10, n_items=9, n_aspects=4, reviews_per_user=5, seed=2)
    reviews, truth = generate_synthetic_corpus(cfg)
    assert len(reviews) == 10 * 5
    assert truth.user_prefs.shape == (10, 4)
    assert np.allclose(truth.user_prefs.sum(axis=1), 1.0)
    assert truth.item_quals.shape == (9, 4)
    assert truth.scores.shape == (10, 9)
    ids = [r.review_id for r in reviews]
    assert len(set(ids)) == len(ids)
    for r in reviews:
        assert 1.0 <= r.overall_rating <= 5.0
        for aspect, start, end in r.marker_spans:
            assert 0 <= start < end <= len(r.tokens)
            assert aspect in truth.aspects


def test_synthetic_liked_reviews_are_richer():
    cfg = SyntheticConfig(n_users=40, n_items=30, n_aspects=4, reviews_per_user=10, seed=5)
    reviews, _ = generate_synthetic_corpus(cfg)
    liked_spans = [len(r.marker_spans) for r in reviews if r.overall_rating >= 3.0]
    disliked_spans = [len(r.marker_spans) for r in reviews if r.overall_rating < 3.0]
    assert liked_spans and disliked_spans
    assert all(n == 3 for n in liked_spans)
    assert all(n == 2 for n in disliked_spans)


def test_synthetic_rating_tracks_mention_count():
    cfg = SyntheticConfig(n_users=40, n_items=30, n_aspects=4, reviews_per_user=10, seed=5)
    reviews, _ = generate_synthetic_corpus(cfg)
    counts = np.array([len(set(r.tokens) & _noun_set()) for r in reviews], dtype=float)
    ratings = np.array([r.overall_rating for r in reviews])
    corr = np.corrcoef(counts, ratings)[0, 1]
    assert corr > 0.5


def _noun_set():
    from xrec.corpus.synthetic import ASPECT_BANKS

    nouns = set()
    for bank in ASPECT_BANKS.values():
        nouns.update(bank)
    return nouns


def test_synthetic_config_validation():
    with pytest.raises(ValueError):
        SyntheticConfig(n_users=0)
    with pytest.raises(ValueError):
        SyntheticConfig(noise=1.5)
    with pytest.raises(ValueError):
        SyntheticConfig(kp_weight=-0.1)
    with pytest.raises(ValueError):
        SyntheticConfig(n_items=5, reviews_per_user=6)


# ---------------------------------------------------------------------- io


def test_reviews_roundtrip(tmp_path):
    reviews, _ = generate_synthetic_corpus(SyntheticConfig(n_users=6, n_items=5,
                                                           reviews_per_user=4, seed=9))
    path = tmp_path / "corpus.jsonl"
    write_reviews(path, reviews)
    assert read_reviews(path) == reviews
    write_reviews(tmp_path / "again.jsonl", reviews)
    assert (tmp_path / "again.jsonl").read_bytes() == path.read_bytes()


def test_vocab_and_split_roundtrip(tmp_path):
    vocab = mine_keyphrases(_mining_corpus(), k_per_aspect=2)
    write_vocab(tmp_path / "kp.jsonl", vocab)
    assert read_vocab(tmp_path / "kp.jsonl") == vocab

    split = {"r2": "test", "r1": "train"}
    write_split(tmp_path / "split.jsonl", split)
    assert read_split(tmp_path / "split.jsonl") == split


def test_io_rejects_wrong_kind(tmp_path):
    vocab = mine_keyphrases(_mining_corpus(), k_per_aspect=2)
    write_vocab(tmp_path / "kp.jsonl", vocab)
    with pytest.raises(ValueError):
        read_reviews(tmp_path / "kp.jsonl")
