"""Text-overlap metrics for generated justifications."""

from __future__ import annotations

import math
from collections import Counter

from ..corpus.text import lemmatize


def _ngrams(tokens, n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def bleu_scores(candidate, references) -> dict:
    """BLEU-1..4 on the 0-100 scale with brevity penalty.

    Modified n-gram precision clipped by the max reference count; the
    reference length is the closest to the candidate's (ties toward the
    shorter). Orders with no candidate n-grams are dropped from the
    geometric mean instead of zeroing it.
    """
    if not references:
        raise ValueError("references must be nonempty")
    candidate = list(candidate)
    references = [list(r) for r in references]
    c_len = len(candidate)
    if c_len == 0:
        return {f"bleu{n}": 0.0 for n in range(1, 5)}
    r_len = min((abs(len(r) - c_len), len(r)) for r in references)[1]
    bp = 1.0 if c_len > r_len else math.exp(1.0 - r_len / c_len)
    precisions = {}
    for n in range(1, 5):
        cand_counts = _ngrams(candidate, n)
        total = sum(cand_counts.values())
        if total == 0:
            precisions[n] = None
            continue
        max_ref = Counter()
        for ref in references:
            for gram, count in _ngrams(ref, n).items():
                if count > max_ref[gram]:
                    max_ref[gram] = count
        clipped = sum(min(count, max_ref[gram]) for gram, count in cand_counts.items())
        precisions[n] = clipped / total
    out = {}
    for n in range(1, 5):
        orders = [precisions[k] for k in range(1, n + 1) if precisions[k] is not None]
        if not orders:
            out[f"bleu{n}"] = 0.0
        elif any(p == 0.0 for p in orders):
            out[f"bleu{n}"] = 0.0
        else:
            log_mean = sum(math.log(p) for p in orders) / len(orders)
            out[f"bleu{n}"] = 100.0 * bp * math.exp(log_mean)
    return out


def _lcs_len(a, b) -> int:
    if not a or not b:
        return 0
    prev = [0] * (len(b) + 1)
    for x in a:
        cur = [0]
        for j, y in enumerate(b, start=1):
            cur.append(prev[j - 1] + 1 if x == y else max(prev[j], cur[j - 1]))
        prev = cur
    return prev[-1]


def rouge_l(candidate, references) -> float:
    """LCS F-measure (equal precision/recall weight) on the 0-100 scale,
    best reference wins."""
    if not references:
        raise ValueError("references must be nonempty")
    candidate = list(candidate)
    best = 0.0
    for ref in references:
        ref = list(ref)
        lcs = _lcs_len(candidate, ref)
        if lcs == 0 or not candidate or not ref:
            continue
        prec = lcs / len(candidate)
        rec = lcs / len(ref)
        best = max(best, 2.0 * prec * rec / (prec + rec))
    return 100.0 * best


def text_overlap(candidate, references) -> dict:
    out = bleu_scores(candidate, references)
    out["rouge_l"] = rouge_l(candidate, references)
    return out


def r_kw(generated_tokens, target_keyphrases) -> float:
    """Fraction of target keyphrases whose lemmas all occur in the text."""
    targets = list(target_keyphrases)
    if not targets:
        raise ValueError("target keyphrases must be nonempty")
    gen_lemmas = {lemmatize(t) for t in generated_tokens}
    hits = 0
    for phrase in targets:
        words = phrase.split(" ")
        if all(lemmatize(w) in gen_lemmas for w in words):
            hits += 1
    return hits / len(targets)
