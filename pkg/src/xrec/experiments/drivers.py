"""Critique experiment drivers: single-step falling-MAP and multi-step
preference tracking."""

from __future__ import annotations

import numpy as np

from ..critique.core import CritiqueParams
from ..critique.session import multistep_step, rerank_after_critique, start_session
from ..metrics.ranking import MetricError, f_map, ranking_metrics
from ..metrics.textgen import r_kw
from ..model.infer import Scorer


def item_keyphrase_vectors(ct) -> np.ndarray:
    """Per-item keyphrase profile: union of its interactions' vectors
    over every split."""
    n_kp = ct.kp_token_rows.shape[0]
    out = np.zeros((len(ct.items), n_kp), dtype=np.float32)
    for split in ct.splits.values():
        for pos in range(len(split)):
            row = int(split.item_rows[pos])
            out[row] = np.maximum(out[row], (split.kp_bits[pos] > 0).astype(np.float32))
    return out


def run_fmap_experiment(
    scorer: Scorer,
    params: CritiqueParams,
    n_pairs: int = 500,
    n_values=(10,),
    seed: int = 0,
) -> dict:
    """Remove one displayed keyphrase for sampled users; measure how far
    the items that displayed it fall.

    Each pair opens a fresh session (full catalog), removes a random
    keyphrase from the top item's explanation, and compares the MAP of
    the affected items (those whose displayed set contained it) before
    and after the re-rank. Positive means the critique pushed them down.
    """
    rng = np.random.default_rng([seed, 101])
    users = scorer.ct.users
    values = {n: [] for n in n_values}
    records = []
    skipped = 0
    for _ in range(n_pairs):
        user_id = users[int(rng.integers(len(users)))]
        session = start_session(scorer, user_id, generate_text=False)
        top = session.top_position
        present = np.nonzero(session.explanation_bits[top] > 0)[0]
        if len(present) == 0:
            skipped += 1
            continue
        k = int(present[int(rng.integers(len(present)))])
        affected = set(session.candidate_rows[session.explanation_bits[:, k] > 0].tolist())
        before = session.ranked_rows().tolist()
        rerank_after_critique(scorer, session, [(k, "remove")], params, generate_text=False)
        after = session.ranked_rows().tolist()
        row = {"user": user_id, "keyphrase": k, "affected": len(affected)}
        try:
            for n in n_values:
                value = f_map(before, after, affected, n)
                values[n].append(value)
                row[f"f_map@{n}"] = value
        except MetricError:
            skipped += 1
            continue
        records.append(row)
    summary = {"pairs": len(records), "skipped": skipped, "seed": seed}
    for n in n_values:
        arr = np.asarray(values[n])
        summary[f"mean_f_map@{n}"] = float(arr.mean()) if len(arr) else 0.0
        summary[f"std_f_map@{n}"] = float(arr.std()) if len(arr) else 0.0
        summary[f"positive_share@{n}"] = float((arr > 0).mean()) if len(arr) else 0.0
    return {"summary": summary, "records": records}


def run_multistep_experiment(
    scorer: Scorer,
    params: CritiqueParams,
    n_users: int = 200,
    max_steps: int = 5,
    n: int = 10,
    seed: int = 0,
) -> dict:
    """Simulated preference building toward one liked item.

    Per sampled user: open a full-catalog session, pick one of the
    user's liked items, then up to ``max_steps`` times add one of that
    item's keyphrases that the displayed explanation is still missing. After
    every step (and at step 0) the target item's keyphrase ranking is
    scored against the item's full keyphrase vector (the union of its
    interactions' keyphrase vectors across the corpus), and the
    regenerated top-item justification is checked for the keyphrases
    critiqued so far (R_KW). Saturated users keep their latest values,
    so their curves go flat.
    """
    if scorer.kp_phrases is None:
        raise ValueError("scorer needs kp_phrases for R_KW")
    ct = scorer.ct
    item_vectors = item_keyphrase_vectors(ct)
    liked_by_user: dict[int, set] = {}
    for split in ct.splits.values():
        for pos in range(len(split)):
            item_row = int(split.item_rows[pos])
            if split.labels[pos] > 0 and item_vectors[item_row].sum() > 0:
                liked_by_user.setdefault(int(split.user_rows[pos]), set()).add(item_row)
    rng = np.random.default_rng([seed, 202])
    user_rows = sorted(liked_by_user)
    if len(user_rows) > n_users:
        picked = rng.choice(len(user_rows), size=n_users, replace=False)
        user_rows = [user_rows[i] for i in sorted(picked)]
    metric_keys = ("ndcg", "map", "precision", "recall")
    per_step_metrics = [{k: [] for k in metric_keys} for _ in range(max_steps + 1)]
    per_step_rkw = [[] for _ in range(max_steps + 1)]
    saturated_at = []
    records = []

    for user_row in user_rows:
        options = sorted(liked_by_user[user_row])
        target_row = int(options[int(rng.integers(len(options)))])
        target_bits = item_vectors[target_row]
        relevant = set(np.nonzero(target_bits > 0)[0].tolist())
        session = start_session(scorer, ct.users[user_row], generate_text=True)
        target_cand = int(np.nonzero(session.candidate_rows == target_row)[0][0])
        added: list[int] = []
        user_record = {"user_row": user_row, "target_row": target_row, "steps": []}

        def measure(step_idx):
            probs = scorer.keyphrase_probs(session.latents[target_cand][None, :])[0]
            order = np.argsort(-probs, kind="stable").tolist()
            metrics = ranking_metrics(order, relevant, n)
            for k in metric_keys:
                per_step_metrics[step_idx][k].append(metrics[k])
            rkw = None
            if added:
                tokens = ct.token_vocab.decode(session.justification)
                rkw = r_kw(tokens, [scorer.kp_phrases[a] for a in added])
                per_step_rkw[step_idx].append(rkw)
            user_record["steps"].append({"step": step_idx, **metrics, "r_kw": rkw})

        measure(0)
        saturated_step = None
        for step in range(1, max_steps + 1):
            outcome = multistep_step(scorer, session, target_row, target_bits, rng, params,
                                     generate_text=True)
            if outcome.saturated and saturated_step is None:
                saturated_step = step
            if not outcome.saturated:
                added.append(outcome.keyphrase_index)
            measure(step)
        saturated_at.append(saturated_step)
        records.append(user_record)

    curves = {}
    for k in metric_keys:
        curves[k] = [float(np.mean(per_step_metrics[s][k])) for s in range(max_steps + 1)]
    curves["r_kw"] = [
        float(np.mean(per_step_rkw[s])) if per_step_rkw[s] else None
        for s in range(max_steps + 1)
    ]
    summary = {
        "users": len(user_rows),
        "max_steps": max_steps,
        "n": n,
        "seed": seed,
        "curves": curves,
        "saturated_users": int(sum(1 for s in saturated_at if s is not None)),
    }
    return {"summary": summary, "records": records}
