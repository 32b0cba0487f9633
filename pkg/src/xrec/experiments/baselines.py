"""Reference predictors the model has to beat."""

from __future__ import annotations

import numpy as np


def keyphrase_popularity_order(train_kp_bits: np.ndarray) -> np.ndarray:
    """Keyphrase indices by descending training frequency (ties to lower index).

    The popularity baseline shows every user the same ranked keyphrase
    list regardless of the item under explanation.
    """
    counts = train_kp_bits.sum(axis=0)
    return np.argsort(-counts, kind="stable")


def global_mean_rating(train_labels: np.ndarray) -> float:
    return float(np.asarray(train_labels).mean())
