"""Array packing: corpus objects -> padded token-id matrices for training."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..corpus.dataset import Dataset
from .vocab import BOS_ID, EOS_ID, PAD_ID, TokenVocab


@dataclass
class SplitArrays:
    """One split's interactions, flattened for batched training."""

    user_rows: np.ndarray  # (N,) int
    item_rows: np.ndarray  # (N,) int
    labels: np.ndarray  # (N,) float
    kp_bits: np.ndarray  # (N, K) float
    dec_in: np.ndarray  # (R, Ld) int, BOS + tokens
    dec_tgt: np.ndarray  # (R, Ld) int, tokens + EOS
    dec_src: np.ndarray  # (R,) int, row into this split's interactions
    dec_rows_by_inter: list  # per interaction: indices into dec_*

    def __len__(self) -> int:
        return len(self.user_rows)


@dataclass
class Batch:
    user_rows: np.ndarray
    item_rows: np.ndarray
    user_hist: np.ndarray
    item_hist: np.ndarray
    labels: np.ndarray
    kp_bits: np.ndarray
    dec_in: np.ndarray
    dec_tgt: np.ndarray
    dec_src: np.ndarray


@dataclass
class CorpusTensors:
    """Everything the network consumes, as numpy arrays."""

    token_vocab: TokenVocab
    users: list
    items: list
    user_index: dict
    item_index: dict
    user_hist: np.ndarray  # (n_users, n_just, L) int64
    item_hist: np.ndarray  # (n_items, n_just, L) int64
    kp_token_rows: np.ndarray  # (K, Lk) int64
    splits: dict  # split name -> SplitArrays

    def batch_for(self, arrays: SplitArrays, idx: np.ndarray) -> Batch:
        dec_idx = (
            np.concatenate([arrays.dec_rows_by_inter[i] for i in idx])
            if len(idx)
            else np.zeros(0, dtype=np.int64)
        )
        # remap src pointers from split positions to batch positions
        pos_of = {int(orig): b for b, orig in enumerate(idx)}
        src = np.asarray([pos_of[int(arrays.dec_src[r])] for r in dec_idx], dtype=np.int64)
        return Batch(
            user_rows=arrays.user_rows[idx],
            item_rows=arrays.item_rows[idx],
            user_hist=self.user_hist,
            item_hist=self.item_hist,
            labels=arrays.labels[idx],
            kp_bits=arrays.kp_bits[idx],
            dec_in=arrays.dec_in[dec_idx],
            dec_tgt=arrays.dec_tgt[dec_idx],
            dec_src=src,
        )


def _pad_rows(seqs, length: int) -> np.ndarray:
    out = np.full((len(seqs), length), PAD_ID, dtype=np.int64)
    for r, seq in enumerate(seqs):
        ids = seq[:length]
        out[r, : len(ids)] = ids
    return out


def build_token_vocab(dataset: Dataset) -> TokenVocab:
    seqs = []
    for ref in list(dataset.user_histories.values()) + list(dataset.item_histories.values()):
        for j in ref.justifications:
            seqs.append(j.tokens)
    for inter in dataset.interactions:
        seqs.extend(inter.target_justifications)
    extra = []
    for phrase in dataset.vocab.phrases:
        extra.extend(phrase.split(" "))
    return TokenVocab.from_corpus(seqs, extra_tokens=extra)


def build_corpus_tensors(dataset: Dataset, token_vocab: TokenVocab, max_just_len: int) -> CorpusTensors:
    users = list(dataset.users)
    items = list(dataset.items)
    user_index = {u: r for r, u in enumerate(users)}
    item_index = {i: r for r, i in enumerate(items)}

    def hist_matrix(histories, owners):
        n_just = len(next(iter(histories.values())).justifications)
        mat = np.full((len(owners), n_just, max_just_len), PAD_ID, dtype=np.int64)
        for r, owner in enumerate(owners):
            for jrow, just in enumerate(histories[owner].justifications):
                ids = token_vocab.encode(just.tokens)[:max_just_len]
                mat[r, jrow, : len(ids)] = ids
        return mat

    user_hist = hist_matrix(dataset.user_histories, users)
    item_hist = hist_matrix(dataset.item_histories, items)

    kp_token_rows = _pad_rows(
        [token_vocab.encode(phrase.split(" ")) for phrase in dataset.vocab.phrases],
        max(1, max(len(phrase.split(" ")) for phrase in dataset.vocab.phrases)),
    )

    dec_len = max_just_len + 1
    splits = {}
    for split in ("train", "valid", "test"):
        inters = dataset.by_split(split)
        u_rows, i_rows, labels, bits = [], [], [], []
        dec_in_rows, dec_tgt_rows, dec_src, rows_by_inter = [], [], [], []
        for n, inter in enumerate(inters):
            u_rows.append(user_index[inter.user_id])
            i_rows.append(item_index[inter.item_id])
            labels.append(inter.label)
            bits.append(inter.keyphrase_vector)
            mine = []
            for target in inter.target_justifications:
                ids = token_vocab.encode(target)[: max_just_len]
                dec_in_rows.append([BOS_ID] + ids)
                dec_tgt_rows.append(ids + [EOS_ID])
                mine.append(len(dec_src))
                dec_src.append(n)
            rows_by_inter.append(np.asarray(mine, dtype=np.int64))
        n_kp = len(dataset.vocab.entries)
        kp_arr = (
            np.asarray(bits, dtype=np.float32).reshape(len(inters), n_kp)
            if inters
            else np.zeros((0, n_kp), dtype=np.float32)
        )
        splits[split] = SplitArrays(
            user_rows=np.asarray(u_rows, dtype=np.int64),
            item_rows=np.asarray(i_rows, dtype=np.int64),
            labels=np.asarray(labels, dtype=np.float32),
            kp_bits=kp_arr,
            dec_in=_pad_rows(dec_in_rows, dec_len),
            dec_tgt=_pad_rows(dec_tgt_rows, dec_len),
            dec_src=np.asarray(dec_src, dtype=np.int64),
            dec_rows_by_inter=rows_by_inter,
        )
    return CorpusTensors(
        token_vocab=token_vocab,
        users=users,
        items=items,
        user_index=user_index,
        item_index=item_index,
        user_hist=user_hist,
        item_hist=item_hist,
        kp_token_rows=kp_token_rows,
        splits=splits,
    )
