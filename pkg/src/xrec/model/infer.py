"""Fast inference over a trained network.

Pooled history codes depend only on the entity, not the pair, so the
scorer computes them once for every user and item and then serves
arbitrary (user, item) latents with a single fused linear layer plus the
heads. This is what makes whole-catalog ranking and critique re-ranking
cheap enough for interactive use.
"""

from __future__ import annotations

import numpy as np

from ..nn.tensor import Tensor
from .batching import CorpusTensors
from .network import Network


class Scorer:
    def __init__(self, net: Network, tensors: CorpusTensors, kp_phrases=None, chunk: int = 1024):
        self.net = net
        self.ct = tensors
        self.kp_phrases = list(kp_phrases) if kp_phrases is not None else None
        self.user_gammas = self._all_gammas(tensors.user_hist, chunk)
        self.item_gammas = self._all_gammas(tensors.item_hist, chunk)

    def _all_gammas(self, hist: np.ndarray, chunk: int) -> np.ndarray:
        n, n_just, length = hist.shape
        flat = hist.reshape(n * n_just, length)
        pooled = np.empty((flat.shape[0], self.net.hyper.d_model), dtype=self.net.dtype)
        for start in range(0, flat.shape[0], chunk):
            stop = min(start + chunk, flat.shape[0])
            pooled[start:stop] = self.net.pool_sequences(flat[start:stop]).data
        return pooled.reshape(n, n_just, -1).mean(axis=1)

    def latents(self, user_row: int, item_rows: np.ndarray) -> np.ndarray:
        """(n, d) latents for one user against many items."""
        item_rows = np.asarray(item_rows, dtype=np.int64)
        n = len(item_rows)
        gu = Tensor(np.repeat(self.user_gammas[user_row][None, :], n, axis=0))
        gi = Tensor(self.item_gammas[item_rows])
        user_rows = np.full(n, user_row, dtype=np.int64)
        return self.net.fuse_latent(gu, gi, user_rows, item_rows).data

    def pair_latents(self, user_rows: np.ndarray, item_rows: np.ndarray) -> np.ndarray:
        user_rows = np.asarray(user_rows, dtype=np.int64)
        item_rows = np.asarray(item_rows, dtype=np.int64)
        gu = Tensor(self.user_gammas[user_rows])
        gi = Tensor(self.item_gammas[item_rows])
        return self.net.fuse_latent(gu, gi, user_rows, item_rows).data

    def ratings(self, z: np.ndarray) -> np.ndarray:
        return self.net.predict_rating(Tensor(z)).data

    def keyphrase_probs(self, z: np.ndarray) -> np.ndarray:
        probs, _ = self.net.explain_keyphrases(Tensor(z))
        return probs

    def top_bits(self, probs: np.ndarray, top_m: int | None = None) -> np.ndarray:
        """Binarize probabilities to each row's top-m set (ties to lower index)."""
        m = self.net.hyper.top_m if top_m is None else top_m
        order = np.argsort(-probs, axis=1, kind="stable")[:, :m]
        bits = np.zeros_like(probs)
        np.put_along_axis(bits, order, 1.0, axis=1)
        return bits

    def justify(self, z_row: np.ndarray, plan_bits: np.ndarray, beam_width: int = 1) -> list[int]:
        """Generate token ids for one latent conditioned on a keyphrase plan."""
        z_tilde = self.net.condition_latent(Tensor(z_row[None, :]), plan_bits[None, :])
        return self.net.generate(z_tilde.data[0], beam_width=beam_width)

    def rank(self, scores: np.ndarray) -> np.ndarray:
        """Positions sorted by descending score, ties toward lower position."""
        return np.argsort(-np.asarray(scores), kind="stable")
