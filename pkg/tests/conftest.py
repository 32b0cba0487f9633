import numpy as np
import pytest

from xrec.corpus.synthetic import SyntheticConfig
from xrec.experiments.pipeline import (
    CorpusOptions,
    build_network,
    prepare_corpus,
    synthesize_corpus_dir,
)
from xrec.model.hyper import HyperParams
from xrec.model.infer import Scorer
from xrec.model.train import TrainConfig, train_model

TINY_SYNTH = dict(
    n_users=30,
    n_items=20,
    n_aspects=3,
    keyphrases_per_aspect=4,
    reviews_per_user=12,
    seed=11,
)
TINY_OPTS = dict(seed=11, threshold=3.0, n_just=4, min_interactions=8,
                 keyphrases_per_aspect=4)
TINY_HYPER = dict(
    d_model=32,
    d_ff=64,
    n_layers=1,
    n_heads=2,
    dropout=0.1,
    n_just=4,
    max_just_len=10,
    batch_size=32,
    warmup=100,
)


@pytest.fixture(scope="session")
def tiny_corpus_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("tiny_corpus")
    synthesize_corpus_dir(SyntheticConfig(**TINY_SYNTH), str(out), CorpusOptions(**TINY_OPTS))
    return str(out)


@pytest.fixture(scope="session")
def tiny_prepared(tiny_corpus_dir):
    opts = CorpusOptions(**TINY_OPTS)
    return prepare_corpus(tiny_corpus_dir, opts, TINY_HYPER["max_just_len"])


@pytest.fixture(scope="session")
def tiny_trained(tiny_prepared):
    """A small trained model shared by the integration-level tests."""
    net = build_network(tiny_prepared, HyperParams(**TINY_HYPER), seed=5)
    result = train_model(net, tiny_prepared.tensors, TrainConfig(epochs=3, seed=5))
    return net, result


@pytest.fixture(scope="session")
def tiny_scorer(tiny_trained, tiny_prepared):
    net, _ = tiny_trained
    return Scorer(net, tiny_prepared.tensors, kp_phrases=tiny_prepared.vocab.phrases)


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)
