import json

import numpy as np
import pytest

from xrec.experiments.baselines import global_mean_rating
from xrec.experiments.pipeline import build_network
from xrec.model.hyper import HyperParams
from xrec.model.train import TrainConfig, TrainingDiverged, evaluate_loss, rating_mae, train_model

from conftest import TINY_HYPER


def small_hyper(**overrides):
    return HyperParams(**{**TINY_HYPER, **overrides})


def test_training_reduces_loss(tiny_trained):
    _, result = tiny_trained
    history = result.history
    assert len(history) == 3
    assert history[-1]["train_loss"] < history[0]["train_loss"]
    assert [row["epoch"] for row in history] == [1, 2, 3]
    for row in history:
        parts = row["valid_parts"]
        assert set(parts) == {"total", "rating", "keyphrase", "justification"}
        assert row["valid_loss"] == parts["total"]


def test_training_is_seed_deterministic(tiny_prepared, tmp_path):
    histories = []
    for run in range(2):
        net = build_network(tiny_prepared, small_hyper(), seed=7)
        log = tmp_path / f"log{run}.jsonl"
        result = train_model(net, tiny_prepared.tensors,
                             TrainConfig(epochs=2, seed=7, log_path=str(log)))
        histories.append(result.history)
    assert histories[0] == histories[1]
    assert (tmp_path / "log0.jsonl").read_bytes() == (tmp_path / "log1.jsonl").read_bytes()
    rows = [json.loads(line) for line in (tmp_path / "log0.jsonl").read_text().splitlines()]
    assert [r["epoch"] for r in rows] == [1, 2]


def test_different_seed_changes_course(tiny_prepared):
    runs = []
    for seed in (1, 2):
        net = build_network(tiny_prepared, small_hyper(), seed=seed)
        result = train_model(net, tiny_prepared.tensors, TrainConfig(epochs=1, seed=seed))
        runs.append(result.history[0]["train_loss"])
    assert runs[0] != runs[1]


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_divergence_raises(tiny_prepared):
    net = build_network(tiny_prepared, small_hyper(lr_scale=1e12, warmup=1), seed=0)
    with pytest.raises(TrainingDiverged):
        train_model(net, tiny_prepared.tensors, TrainConfig(epochs=3, seed=0))


def test_early_stopping_on_patience(tiny_prepared):
    net = build_network(tiny_prepared, small_hyper(lr_scale=30.0, warmup=5), seed=0)
    result = train_model(net, tiny_prepared.tensors, TrainConfig(epochs=40, seed=0, patience=2))
    assert result.stopped_early
    assert len(result.history) < 40
    assert result.best_epoch <= len(result.history)


def test_evaluate_loss_matches_single_batch(tiny_prepared):
    net = build_network(tiny_prepared, small_hyper(), seed=3)
    tensors = tiny_prepared.tensors
    arrays = tensors.splits["valid"]
    assert len(arrays) <= 256
    averaged = evaluate_loss(net, tensors, arrays, batch_size=256)
    batch = tensors.batch_for(arrays, np.arange(len(arrays)))
    _, parts = net.joint_loss(batch, train=False)
    for key, val in parts.as_dict().items():
        assert averaged[key] == pytest.approx(val, rel=1e-6)


def test_rating_mae_matches_manual(tiny_trained, tiny_prepared):
    net, _ = tiny_trained
    tensors = tiny_prepared.tensors
    arrays = tensors.splits["test"]
    got = rating_mae(net, tensors, arrays)
    batch = tensors.batch_for(arrays, np.arange(len(arrays)))
    z = net.encode(batch.user_rows, batch.item_rows, batch.user_hist, batch.item_hist)
    pred = net.predict_rating(z).data
    manual = float(np.abs(pred - arrays.labels).mean())
    assert got == pytest.approx(manual, rel=1e-6)


def test_global_mean_baseline():
    assert global_mean_rating(np.array([0.0, 1.0, 1.0, 0.0])) == 0.5
