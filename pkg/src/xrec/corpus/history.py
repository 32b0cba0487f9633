"""Sampled justification histories for users and items."""

from __future__ import annotations

import numpy as np

from .types import CorpusError, Justification, JustificationReference


def build_history(
    owner: str,
    pool: list[Justification],
    n_just: int,
    seed: int,
) -> JustificationReference:
    """Sample exactly ``n_just`` justifications from the owner's pool.

    Without replacement when the pool is large enough, with replacement
    otherwise.  The rng is derived from both the seed and the owner id so
    different owners get independent draws under one corpus seed.
    """
    if not pool:
        raise CorpusError("no-justifications", owner)
    rng = np.random.default_rng([seed, _owner_key(owner)])
    if len(pool) >= n_just:
        idx = rng.choice(len(pool), size=n_just, replace=False)
    else:
        idx = rng.choice(len(pool), size=n_just, replace=True)
    return JustificationReference(owner=owner, justifications=tuple(pool[i] for i in idx))


def _owner_key(owner: str) -> int:
    # stable across processes, unlike hash()
    key = 0
    for ch in owner:
        key = (key * 131 + ord(ch)) % (2**31 - 1)
    return key
