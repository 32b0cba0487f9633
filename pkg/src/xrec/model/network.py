"""The joint rating / keyphrase / justification network.

One latent ``z`` per (user, item) pair feeds three heads:

  * a rating head (two hidden layers, sigmoid output, squared error
    against the binarized label),
  * a keyphrase head (same shape, one logit per vocabulary keyphrase,
    binary cross entropy), and
  * a transformer decoder that generates a justification, conditioned on
    ``z`` shifted by the mean embedding of a keyphrase plan.

``z`` itself is a linear fusion of four blocks: transformer-pooled
representations of the user's and the item's justification histories
(per-sequence first-token pooling through a sigmoid, then averaged over
the history) and two plain id-factor tables.

All forward methods work on Tensors; with no tape active they are plain
numpy. Gradient-based critiquing reuses ``keyphrase_logits`` with the
latent marked as requiring grad.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..nn import tensor as T
from ..nn.serialize import load_checkpoint, save_checkpoint
from ..nn.tensor import Tensor
from .hyper import HyperParams
from .vocab import BOS_ID, EOS_ID, PAD_ID, TokenVocab

NEG_INF = -1e9


def sinusoid_table(max_len: int, d_model: int, dtype) -> np.ndarray:
    pos = np.arange(max_len, dtype=np.float64)[:, None]
    i = np.arange(d_model, dtype=np.float64)[None, :]
    angle = pos / np.power(10000.0, (2.0 * np.floor(i / 2.0)) / d_model)
    table = np.where(i % 2 == 0, np.sin(angle), np.cos(angle))
    return table.astype(dtype)


def _xavier(rng, fan_in, fan_out, dtype):
    limit = math.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=(fan_in, fan_out)).astype(dtype)


def _linear_params(rng, fan_in, fan_out, dtype):
    return {
        "w": Tensor(_xavier(rng, fan_in, fan_out, dtype), requires_grad=True),
        "b": Tensor(np.zeros(fan_out, dtype=dtype), requires_grad=True),
    }


def _ln_params(d, dtype):
    return {
        "gain": Tensor(np.ones(d, dtype=dtype), requires_grad=True),
        "bias": Tensor(np.zeros(d, dtype=dtype), requires_grad=True),
    }


def _attn_params(rng, d, dtype):
    return {name: _linear_params(rng, d, d, dtype) for name in ("q", "k", "v", "o")}


def _linear(x, p):
    return T.add(T.matmul(x, p["w"]), p["b"])


def named_params(tree, prefix="") -> dict:
    """Flatten a nest of dicts/lists of Tensors to dotted names, insertion order."""
    out = {}
    if isinstance(tree, Tensor):
        out[prefix] = tree
        return out
    items = enumerate(tree) if isinstance(tree, (list, tuple)) else tree.items()
    for key, val in items:
        name = f"{prefix}.{key}" if prefix else str(key)
        out.update(named_params(val, name))
    return out


@dataclass
class LossBreakdown:
    total: float
    rating: float
    keyphrase: float
    justification: float

    def as_dict(self) -> dict:
        return {
            "total": self.total,
            "rating": self.rating,
            "keyphrase": self.keyphrase,
            "justification": self.justification,
        }


class Network:
    def __init__(
        self,
        hyper: HyperParams,
        n_tokens: int,
        n_users: int,
        n_items: int,
        kp_token_rows: np.ndarray,
        seed: int = 0,
        dtype=np.float32,
    ):
        self.hyper = hyper
        self.n_tokens = n_tokens
        self.n_users = n_users
        self.n_items = n_items
        self.dtype = np.dtype(dtype)
        self.kp_token_rows = np.ascontiguousarray(kp_token_rows, dtype=np.int64)
        self.n_keyphrases = kp_token_rows.shape[0]
        kp_mask = (self.kp_token_rows != PAD_ID).astype(self.dtype)
        counts = np.maximum(kp_mask.sum(axis=1, keepdims=True), 1.0)
        self._kp_mask3 = Tensor(kp_mask[:, :, None])
        self._kp_inv_count = Tensor((1.0 / counts).astype(self.dtype))
        max_pos = max(hyper.max_just_len + 2, 16)
        self.pos_table = sinusoid_table(max_pos, hyper.d_model, self.dtype)
        self.p = self._init_params(np.random.default_rng(seed))

    # ---------------------------------------------------------------- setup

    def _init_params(self, rng) -> dict:
        h, dt = self.hyper, self.dtype
        d, dff = h.d_model, h.d_ff
        p: dict = {}
        p["tok_emb"] = Tensor(
            (rng.standard_normal((self.n_tokens, d)) * d**-0.5).astype(dt), requires_grad=True
        )
        p["enc"] = [
            {
                "att": _attn_params(rng, d, dt),
                "ln1": _ln_params(d, dt),
                "ff": {
                    "l1": _linear_params(rng, d, dff, dt),
                    "l2": _linear_params(rng, dff, d, dt),
                },
                "ln2": _ln_params(d, dt),
            }
            for _ in range(h.n_layers)
        ]
        p["dec"] = [
            {
                "self": _attn_params(rng, d, dt),
                "ln1": _ln_params(d, dt),
                "cross": _attn_params(rng, d, dt),
                "ln2": _ln_params(d, dt),
                "ff": {
                    "l1": _linear_params(rng, d, dff, dt),
                    "l2": _linear_params(rng, dff, d, dt),
                },
                "ln3": _ln_params(d, dt),
            }
            for _ in range(h.n_layers)
        ]
        p["dec_out"] = _linear_params(rng, d, self.n_tokens, dt)
        p["beta_u"] = Tensor(
            (rng.standard_normal((self.n_users, d)) * d**-0.5).astype(dt), requires_grad=True
        )
        p["beta_i"] = Tensor(
            (rng.standard_normal((self.n_items, d)) * d**-0.5).astype(dt), requires_grad=True
        )
        p["fuse"] = _linear_params(rng, 4 * d, d, dt)
        for head in ("rate", "kp"):
            out_dim = 1 if head == "rate" else self.n_keyphrases
            p[head] = {
                "l1": _linear_params(rng, d, 128, dt),
                "l2": _linear_params(rng, 128, 64, dt),
                "l3": _linear_params(rng, 64, out_dim, dt),
            }
        return p

    def parameters(self) -> list:
        return list(self.named_parameters().values())

    def named_parameters(self) -> dict:
        return named_params(self.p)

    # ------------------------------------------------------------ attention

    def _attention(self, x_q, x_kv, mask, params, train, rng):
        h = self.hyper
        n_heads, d = h.n_heads, h.d_model
        dk = d // n_heads
        bsz, lq = x_q.shape[0], x_q.shape[1]
        lk = x_kv.shape[1]

        def split_heads(t, length):
            t = T.reshape(t, (bsz, length, n_heads, dk))
            return T.transpose(t, (0, 2, 1, 3))

        q = split_heads(_linear(x_q, params["q"]), lq)
        k = split_heads(_linear(x_kv, params["k"]), lk)
        v = split_heads(_linear(x_kv, params["v"]), lk)
        scores = T.scale(T.matmul(q, T.transpose(k, (0, 1, 3, 2))), dk**-0.5)
        if mask is not None:
            scores = T.add(scores, mask)
        att = T.softmax_last(scores)
        if train and h.dropout > 0:
            att = T.dropout(att, h.dropout, rng)
        ctx = T.matmul(att, v)
        ctx = T.reshape(T.transpose(ctx, (0, 2, 1, 3)), (bsz, lq, d))
        return _linear(ctx, params["o"])

    def _ffn(self, x, params):
        return _linear(T.leaky_relu(_linear(x, params["l1"]), 0.0), params["l2"])

    def _sub(self, x, out, ln, train, rng):
        if train and self.hyper.dropout > 0:
            out = T.dropout(out, self.hyper.dropout, rng)
        return T.layer_norm(T.add(x, out), ln["gain"], ln["bias"])

    def _embed_tokens(self, ids: np.ndarray, train, rng):
        d = self.hyper.d_model
        x = T.embedding(self.p["tok_emb"], ids)
        x = T.scale(x, math.sqrt(d))
        x = T.add(x, Tensor(self.pos_table[: ids.shape[1]]))
        if train and self.hyper.dropout > 0:
            x = T.dropout(x, self.hyper.dropout, rng)
        return x

    # -------------------------------------------------------------- encoder

    def pool_sequences(self, ids: np.ndarray, train: bool = False, rng=None):
        """Encode token rows (M, L); return per-row first-token sigmoid (M, d)."""
        pad_add = np.where(ids == PAD_ID, NEG_INF, 0.0).astype(self.dtype)[:, None, None, :]
        mask = Tensor(pad_add)
        x = self._embed_tokens(ids, train, rng)
        for block in self.p["enc"]:
            a = self._attention(x, x, mask, block["att"], train, rng)
            x = self._sub(x, a, block["ln1"], train, rng)
            f = self._ffn(x, block["ff"])
            x = self._sub(x, f, block["ln2"], train, rng)
        first = T.sliced(x, (slice(None), 0))
        return T.sigmoid(first)

    def history_vectors(self, hist_ids: np.ndarray, train: bool = False, rng=None):
        """(N, n_just, L) token rows -> (N, d) mean of pooled sequence codes."""
        n, n_just, length = hist_ids.shape
        pooled = self.pool_sequences(hist_ids.reshape(n * n_just, length), train, rng)
        return T.mean_axis(T.reshape(pooled, (n, n_just, self.hyper.d_model)), axis=1)

    def fuse_latent(self, gamma_u, gamma_i, user_rows: np.ndarray, item_rows: np.ndarray):
        beta_u = T.embedding(self.p["beta_u"], user_rows)
        beta_i = T.embedding(self.p["beta_i"], item_rows)
        return _linear(T.concat([gamma_u, gamma_i, beta_u, beta_i], axis=1), self.p["fuse"])

    def encode(
        self,
        user_rows: np.ndarray,
        item_rows: np.ndarray,
        user_hist: np.ndarray,
        item_hist: np.ndarray,
        train: bool = False,
        rng=None,
    ):
        """Latents for a batch of pairs. Histories are token-id matrices
        (n_users/n_items, n_just, L); rows select into them."""
        bsz = len(user_rows)
        both = np.concatenate([user_hist[user_rows], item_hist[item_rows]], axis=0)
        gammas = self.history_vectors(both, train, rng)
        gamma_u = T.sliced(gammas, (slice(0, bsz),))
        gamma_i = T.sliced(gammas, (slice(bsz, 2 * bsz),))
        return self.fuse_latent(gamma_u, gamma_i, user_rows, item_rows)

    # ----------------------------------------------------------------- heads

    def _head(self, z, params):
        x = T.leaky_relu(_linear(z, params["l1"]), 0.2)
        x = T.leaky_relu(_linear(x, params["l2"]), 0.2)
        return _linear(x, params["l3"])

    def predict_rating(self, z):
        """(B, d) -> (B,) rating in (0, 1)."""
        out = T.sigmoid(self._head(z, self.p["rate"]))
        return T.reshape(out, (z.shape[0],))

    def keyphrase_logits(self, z):
        """(B, d) -> (B, K) logits; sigmoid gives per-keyphrase probabilities."""
        return self._head(z, self.p["kp"])

    def explain_keyphrases(self, z, top_m: int | None = None):
        """Probabilities and the top-m indices (ties toward lower index)."""
        probs = T.sigmoid(self.keyphrase_logits(z)).data
        m = self.hyper.top_m if top_m is None else top_m
        order = np.argsort(-probs, axis=1, kind="stable")[:, :m]
        return probs, order

    # --------------------------------------------------------- aspect vector

    def keyphrase_vectors(self):
        """(K, d) mean token embedding per keyphrase."""
        emb = T.embedding(self.p["tok_emb"], self.kp_token_rows)
        summed = T.sum_axis(T.mul(emb, self._kp_mask3), axis=1)
        return T.mul(summed, self._kp_inv_count)

    def aspect_vector(self, plan_bits: np.ndarray):
        """Mean keyphrase vector over each row's plan; empty plan -> zeros."""
        plan = np.asarray(plan_bits, dtype=self.dtype)
        norm = plan / np.maximum(plan.sum(axis=1, keepdims=True), 1.0)
        return T.matmul(Tensor(norm), self.keyphrase_vectors())

    def condition_latent(self, z, plan_bits: np.ndarray):
        return T.add(z, self.aspect_vector(plan_bits))

    # --------------------------------------------------------------- decoder

    def _decode_states(self, z_tilde, dec_in: np.ndarray, train, rng):
        bsz, length = dec_in.shape
        causal = np.triu(np.full((length, length), NEG_INF, dtype=self.dtype), k=1)
        pad_add = np.where(dec_in == PAD_ID, NEG_INF, 0.0).astype(self.dtype)[:, None, None, :]
        mask = Tensor(causal[None, None, :, :] + pad_add)
        mem = T.reshape(z_tilde, (bsz, 1, self.hyper.d_model))
        x = self._embed_tokens(dec_in, train, rng)
        for block in self.p["dec"]:
            a = self._attention(x, x, mask, block["self"], train, rng)
            x = self._sub(x, a, block["ln1"], train, rng)
            c = self._attention(x, mem, None, block["cross"], train, rng)
            x = self._sub(x, c, block["ln2"], train, rng)
            f = self._ffn(x, block["ff"])
            x = self._sub(x, f, block["ln3"], train, rng)
        return x

    def decode_logits(self, z_tilde, dec_in: np.ndarray, train: bool = False, rng=None):
        x = self._decode_states(z_tilde, dec_in, train, rng)
        return _linear(x, self.p["dec_out"])

    def justification_loss(self, z_tilde, dec_in: np.ndarray, dec_tgt: np.ndarray,
                           train: bool = False, rng=None):
        logits = self.decode_logits(z_tilde, dec_in, train, rng)
        flat = T.reshape(logits, (-1, self.n_tokens))
        return T.label_smoothed_ce(flat, dec_tgt.reshape(-1), self.hyper.label_smoothing, PAD_ID)

    def generate(self, z_tilde_row: np.ndarray, max_len: int | None = None,
                 beam_width: int = 1) -> list[int]:
        """Decode one justification from a single conditioned latent (d,).

        Greedy when beam_width is 1, else a small length-normalized beam.
        Returns token ids without specials.
        """
        max_len = self.hyper.max_just_len if max_len is None else max_len
        z = Tensor(np.asarray(z_tilde_row, dtype=self.dtype).reshape(1, -1))

        def step_logits(prefix_rows: np.ndarray, zt):
            logits = self.decode_logits(zt, prefix_rows)
            return logits.data[:, -1, :]

        if beam_width <= 1:
            prefix = [BOS_ID]
            for _ in range(max_len):
                logits = step_logits(np.asarray([prefix], dtype=np.int64), z)[0]
                nxt = int(logits.argmax())
                if nxt == EOS_ID:
                    break
                prefix.append(nxt)
            return [t for t in prefix[1:] if t != PAD_ID]

        beams = [([BOS_ID], 0.0, False)]
        for _ in range(max_len):
            live = [b for b in beams if not b[2]]
            if not live:
                break
            rows = np.asarray([b[0] for b in live], dtype=np.int64)
            zt = Tensor(np.repeat(z.data, len(live), axis=0))
            logits = step_logits(rows, zt)
            logp = logits - _logsumexp_rows(logits)
            cand = [b for b in beams if b[2]]
            for (toks, score, _), row in zip(live, logp):
                top = np.argsort(-row, kind="stable")[: beam_width]
                for t in top:
                    t = int(t)
                    cand.append((toks + [t], score + float(row[t]), t == EOS_ID))
            cand.sort(key=lambda b: -b[1] / len(b[0]))
            beams = cand[:beam_width]
            if all(b[2] for b in beams):
                break
        best = max(beams, key=lambda b: b[1] / len(b[0]))
        return [t for t in best[0][1:] if t not in (EOS_ID, PAD_ID)]

    # ------------------------------------------------------------ joint loss

    def joint_loss(self, batch, train: bool = False, rng=None):
        """Weighted three-task loss for one interaction batch.

        ``batch`` carries user_rows/item_rows, history matrices, labels,
        keyphrase bit rows, and flattened decoder rows with a src pointer
        back into the batch. Returns (loss Tensor, LossBreakdown).
        """
        h = self.hyper
        z = self.encode(batch.user_rows, batch.item_rows, batch.user_hist, batch.item_hist,
                        train, rng)
        l_rate = T.mse(self.predict_rating(z), batch.labels)
        l_kp = T.bce_with_logits(self.keyphrase_logits(z), batch.kp_bits)
        z_tilde = self.condition_latent(z, batch.kp_bits)
        z_rows = T.embedding(z_tilde, batch.dec_src)
        l_just = self.justification_loss(z_rows, batch.dec_in, batch.dec_tgt, train, rng)
        total = T.add(
            T.add(T.scale(l_rate, h.lambda_rating), T.scale(l_kp, h.lambda_keyphrase)),
            T.scale(l_just, h.lambda_justification),
        )
        parts = LossBreakdown(
            total=total.item(),
            rating=l_rate.item(),
            keyphrase=l_kp.item(),
            justification=l_just.item(),
        )
        return total, parts

    # ----------------------------------------------------------- persistence

    def tensors_for_checkpoint(self) -> dict:
        return {name: p.data for name, p in self.named_parameters().items()}

    def save(self, path, extra_header: dict):
        header = dict(extra_header)
        header["hyper"] = self.hyper.to_dict()
        header["sizes"] = {
            "n_tokens": self.n_tokens,
            "n_users": self.n_users,
            "n_items": self.n_items,
            "n_keyphrases": self.n_keyphrases,
        }
        header["kp_token_rows"] = self.kp_token_rows.tolist()
        save_checkpoint(path, header, self.tensors_for_checkpoint())

    @classmethod
    def load(cls, path):
        header, tensors = load_checkpoint(path)
        hyper = HyperParams.from_dict(header["hyper"])
        sizes = header["sizes"]
        net = cls(
            hyper,
            n_tokens=sizes["n_tokens"],
            n_users=sizes["n_users"],
            n_items=sizes["n_items"],
            kp_token_rows=np.asarray(header["kp_token_rows"], dtype=np.int64),
            seed=0,
        )
        named = net.named_parameters()
        if set(named) != set(tensors):
            missing = set(named) ^ set(tensors)
            raise ValueError(f"checkpoint tensor names do not match the model: {sorted(missing)[:5]}")
        for name, param in named.items():
            arr = tensors[name]
            if arr.shape != param.data.shape:
                raise ValueError(f"shape mismatch for {name}: {arr.shape} vs {param.data.shape}")
            param.data = np.ascontiguousarray(arr, dtype=net.dtype)
        return net, header


def _logsumexp_rows(x: np.ndarray) -> np.ndarray:
    m = x.max(axis=1, keepdims=True)
    return m + np.log(np.exp(x - m).sum(axis=1, keepdims=True))
