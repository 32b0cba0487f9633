"""Offline evaluation protocols: keyphrase quality, leave-one-out ranking,
rating rank correlation, and justification text quality."""

from __future__ import annotations

import numpy as np

from ..metrics.ranking import PreferencePair, kendall_tau_delta, ranking_metrics
from ..metrics.textgen import r_kw, text_overlap
from ..model.infer import Scorer
from .baselines import keyphrase_popularity_order


def _mean_of(dicts, key):
    return float(np.mean([d[key] for d in dicts])) if dicts else 0.0


def keyphrase_eval(scorer: Scorer, split: str = "test", n: int = 10, batch: int = 512) -> dict:
    """Model explanation ranking vs the popularity baseline, same pairs."""
    arrays = scorer.ct.splits[split]
    train_bits = scorer.ct.splits["train"].kp_bits
    pop_ranked = list(keyphrase_popularity_order(train_bits))
    model_rows, pop_rows = [], []
    skipped = 0
    n_inter = len(arrays)
    for start in range(0, n_inter, batch):
        idx = np.arange(start, min(start + batch, n_inter))
        z = scorer.pair_latents(arrays.user_rows[idx], arrays.item_rows[idx])
        probs = scorer.keyphrase_probs(z)
        orders = np.argsort(-probs, axis=1, kind="stable")
        for local, inter in enumerate(idx):
            relevant = set(np.nonzero(arrays.kp_bits[inter] > 0)[0].tolist())
            if not relevant:
                skipped += 1
                continue
            model_rows.append(ranking_metrics(orders[local].tolist(), relevant, n))
            pop_rows.append(ranking_metrics(pop_ranked, relevant, n))
    keys = ("ndcg", "map", "precision", "recall")
    return {
        "n": n,
        "pairs": len(model_rows),
        "skipped_no_relevant": skipped,
        "model": {k: _mean_of(model_rows, k) for k in keys},
        "popularity": {k: _mean_of(pop_rows, k) for k in keys},
    }


def leave_one_out(scorer: Scorer, n_negatives: int = 99, n: int = 10, seed: int = 0,
                  min_negatives: int = 5) -> dict:
    """Rank one liked held-out item against sampled unseen items, per user.

    Users with fewer than n_negatives unseen items get a smaller slate;
    below min_negatives they are skipped outright. Small catalogs would
    otherwise leave nothing to evaluate.
    """
    ct = scorer.ct
    seen: dict[int, set] = {}
    for split in ("train", "valid", "test"):
        arrays = ct.splits[split]
        for u, i in zip(arrays.user_rows.tolist(), arrays.item_rows.tolist()):
            seen.setdefault(u, set()).add(i)
    test = ct.splits["test"]
    liked_by_user: dict[int, list] = {}
    for pos in range(len(test)):
        if test.labels[pos] > 0:
            liked_by_user.setdefault(int(test.user_rows[pos]), []).append(int(test.item_rows[pos]))
    rows = []
    skipped = 0
    all_items = np.arange(len(ct.items))
    rng = np.random.default_rng([seed, 303])
    slate_sizes = []
    for user_row in sorted(liked_by_user):
        unseen = np.setdiff1d(all_items, sorted(seen.get(user_row, set())), assume_unique=True)
        take = min(n_negatives, len(unseen))
        if take < min_negatives:
            skipped += 1
            continue
        liked_options = liked_by_user[user_row]
        liked = int(liked_options[rng.integers(len(liked_options))])
        negatives = rng.choice(unseen, size=take, replace=False)
        slate = np.concatenate([[liked], negatives])
        slate_sizes.append(len(slate))
        z = scorer.latents(user_row, slate)
        scores = scorer.ratings(z)
        ranked = slate[scorer.rank(scores)]
        rows.append(ranking_metrics(ranked.tolist(), {liked}, n))
    keys = ("ndcg", "map", "precision", "recall")
    return {
        "n": n,
        "requested_negatives": n_negatives,
        "mean_slate_size": float(np.mean(slate_sizes)) if slate_sizes else 0.0,
        "users": len(rows),
        "skipped_few_negatives": skipped,
        "metrics": {k: _mean_of(rows, k) for k in keys},
    }


def rating_rank_correlation(scorer: Scorer, split: str = "test", delta_min: float = 1.0,
                            max_pairs_per_user: int = 50, seed: int = 0) -> dict:
    """Kendall rank correlation over per-user item pairs with label gaps."""
    arrays = scorer.ct.splits[split]
    by_user: dict[int, list] = {}
    for pos in range(len(arrays)):
        by_user.setdefault(int(arrays.user_rows[pos]), []).append(pos)
    rng = np.random.default_rng([seed, 404])
    pairs = []
    for user_row in sorted(by_user):
        positions = by_user[user_row]
        if len(positions) < 2:
            continue
        z = scorer.pair_latents(arrays.user_rows[positions], arrays.item_rows[positions])
        scores = scorer.ratings(z)
        labels = arrays.labels[positions]
        combos = [(a, b) for a in range(len(positions)) for b in range(a + 1, len(positions))]
        if len(combos) > max_pairs_per_user:
            picked = rng.choice(len(combos), size=max_pairs_per_user, replace=False)
            combos = [combos[i] for i in picked]
        for a, b in combos:
            pairs.append(PreferencePair(
                true_a=float(labels[a]), true_b=float(labels[b]),
                score_a=float(scores[a]), score_b=float(scores[b]),
            ))
    value = kendall_tau_delta(pairs, delta_min)
    qualifying = sum(1 for p in pairs if p.delta >= delta_min and p.true_a != p.true_b)
    return {"delta_min": delta_min, "pairs": qualifying, "kendall": value}


def justification_eval(scorer: Scorer, split: str = "test", max_pairs: int = 200,
                       seed: int = 0, beam_width: int = 1) -> dict:
    """Generation quality with and without keyphrase conditioning.

    Conditioned generations use the pair's own keyphrase set as the plan;
    the ablation zeroes the plan, which zeroes the aspect shift. R_KW is
    measured against the plan keyphrases, BLEU/ROUGE against the pair's
    reference justifications.
    """
    arrays = scorer.ct.splits[split]
    vocab = scorer.ct.token_vocab
    if scorer.kp_phrases is None:
        raise ValueError("scorer needs kp_phrases for text metrics")
    eligible = [pos for pos in range(len(arrays)) if arrays.kp_bits[pos].sum() > 0]
    rng = np.random.default_rng([seed, 505])
    if len(eligible) > max_pairs:
        eligible = sorted(rng.choice(eligible, size=max_pairs, replace=False).tolist())
    cond_rkw, abl_rkw, cond_overlap = [], [], []
    records = []
    for pos in eligible:
        z = scorer.pair_latents(arrays.user_rows[[pos]], arrays.item_rows[[pos]])[0]
        bits = arrays.kp_bits[pos]
        targets = [scorer.kp_phrases[k] for k in np.nonzero(bits > 0)[0]]
        cond_ids = scorer.justify(z, bits, beam_width=beam_width)
        abl_ids = scorer.justify(z, np.zeros_like(bits), beam_width=beam_width)
        cond_tokens = vocab.decode(cond_ids)
        abl_tokens = vocab.decode(abl_ids)
        refs = _references_for(scorer, pos, split)
        cond_rkw.append(r_kw(cond_tokens, targets))
        abl_rkw.append(r_kw(abl_tokens, targets))
        if refs:
            cond_overlap.append(text_overlap(cond_tokens, refs))
        records.append({
            "pair": pos,
            "r_kw_conditioned": cond_rkw[-1],
            "r_kw_unconditioned": abl_rkw[-1],
        })
    out = {
        "pairs": len(eligible),
        "r_kw_conditioned": float(np.mean(cond_rkw)) if cond_rkw else 0.0,
        "r_kw_unconditioned": float(np.mean(abl_rkw)) if abl_rkw else 0.0,
        "records": records,
    }
    if cond_overlap:
        for key in cond_overlap[0]:
            out[key] = float(np.mean([row[key] for row in cond_overlap]))
    return out


def _references_for(scorer: Scorer, pos: int, split: str) -> list:
    arrays = scorer.ct.splits[split]
    refs = []
    for row in arrays.dec_rows_by_inter[pos]:
        ids = arrays.dec_tgt[row]
        refs.append(scorer.ct.token_vocab.decode(ids.tolist()))
    return [r for r in refs if r]
