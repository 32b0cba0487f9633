"""Dev run: synthesize the desk-scale corpus, train, checkpoint, report."""

import json
import os
import sys
import time

import numpy as np

from xrec.corpus import SyntheticConfig
from xrec.experiments.pipeline import (
    CorpusOptions,
    build_network,
    checkpoint_header,
    prepare_corpus,
    synthesize_corpus_dir,
)
from xrec.model import HyperParams, TrainConfig, rating_mae, train_model

out = sys.argv[1] if len(sys.argv) > 1 else "/tmp/xrec_dev/run1"
epochs = int(sys.argv[2]) if len(sys.argv) > 2 else 10
os.makedirs(out, exist_ok=True)
corpus_dir = os.path.join(out, "corpus")

cfg = SyntheticConfig(seed=7)
opts = CorpusOptions(seed=7, threshold=3.0, n_just=8)
synthesize_corpus_dir(cfg, corpus_dir, opts)
hyper = HyperParams(d_model=64, d_ff=256, n_layers=2, n_heads=4, n_just=8,
                    max_just_len=12, batch_size=64, warmup=500, lr_scale=1.0)
prepared = prepare_corpus(corpus_dir, opts, hyper.max_just_len)
net = build_network(prepared, hyper, seed=3)

t0 = time.time()
result = train_model(net, prepared.tensors, TrainConfig(
    epochs=epochs, patience=4, seed=3, log_path=os.path.join(out, "train_log.jsonl")))
elapsed = time.time() - t0

ct = prepared.tensors
mae = rating_mae(net, ct, ct.splits["test"])
gm = float(ct.splits["train"].labels.mean())
base_mae = float(np.abs(gm - ct.splits["test"].labels).mean())

report = {
    "elapsed_s": round(elapsed, 1),
    "epochs_run": len(result.history),
    "best_epoch": result.best_epoch,
    "best_valid": result.best_valid,
    "first_train_loss": result.history[0]["train_loss"],
    "last_train_loss": result.history[-1]["train_loss"],
    "test_mae": mae,
    "global_mean_mae": base_mae,
    "mae_improvement": 1.0 - mae / base_mae,
}
print(json.dumps(report, indent=2))
net.save(os.path.join(out, "model.ckpt"), checkpoint_header(prepared, opts))
print("saved", os.path.join(out, "model.ckpt"))
