"""Interactive critiquing sessions over a fixed candidate set.

A session pins one user, a candidate item subset, and one latent per
candidate. Critiques validate against the currently displayed top item's
explanation, then push every candidate's latent toward that item's own
explanation with the same edits imposed; the edited latents persist, so
successive critiques compound instead of being recomputed from raw
histories.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field

import numpy as np

from ..model.infer import Scorer
from .core import (
    CritiqueError,
    CritiqueParams,
    apply_critique_batch,
    impose_edits,
    make_critique_vector,
)

SNAPSHOT_KIND = "session"
SNAPSHOT_VERSION = 1


@dataclass
class CritiqueEvent:
    keyphrase_index: int
    action: str
    timestamp: float

    def as_dict(self) -> dict:
        return {
            "keyphrase_index": self.keyphrase_index,
            "action": self.action,
            "timestamp": self.timestamp,
        }


@dataclass
class Session:
    session_id: str
    user_id: str
    user_row: int
    candidate_rows: np.ndarray  # item rows, ascending (tie order = item order)
    base_latents: np.ndarray  # (C, d) as first computed
    latents: np.ndarray  # (C, d) current, carried across critiques
    scores: np.ndarray  # (C,)
    explanation_bits: np.ndarray  # (C, K) current displayed sets
    ranking: np.ndarray  # positions into candidate_rows, best first
    history: list = field(default_factory=list)
    justification: list = field(default_factory=list)  # top item's token ids
    last_traces: list | None = None

    @property
    def top_position(self) -> int:
        return int(self.ranking[0])

    def ranked_rows(self) -> np.ndarray:
        return self.candidate_rows[self.ranking]

    def convergence_summary(self) -> dict | None:
        if self.last_traces is None:
            return None
        iters = [t.iterations for t in self.last_traces]
        return {
            "converged": int(sum(t.converged for t in self.last_traces)),
            "total": len(self.last_traces),
            "max_iterations": max(iters) if iters else 0,
            "mean_iterations": float(np.mean(iters)) if iters else 0.0,
        }


def _score_and_rank(scorer: Scorer, session: Session, generate_text: bool):
    session.scores = scorer.ratings(session.latents)
    probs = scorer.keyphrase_probs(session.latents)
    session.explanation_bits = scorer.top_bits(probs)
    session.ranking = scorer.rank(session.scores)
    if generate_text:
        top = session.top_position
        session.justification = scorer.justify(
            session.latents[top], session.explanation_bits[top]
        )
    else:
        session.justification = []


def start_session(
    scorer: Scorer,
    user_id: str,
    n_candidates: int | None = None,
    session_id: str | None = None,
    generate_text: bool = True,
) -> Session:
    """Rank the catalog for a user and open a session on the top slice."""
    if user_id not in scorer.ct.user_index:
        raise CritiqueError("unknown-entity", f"user {user_id!r} not in catalog")
    user_row = scorer.ct.user_index[user_id]
    all_rows = np.arange(len(scorer.ct.items), dtype=np.int64)
    latents = scorer.latents(user_row, all_rows)
    scores = scorer.ratings(latents)
    if n_candidates is not None and n_candidates < len(all_rows):
        if n_candidates < 1:
            raise CritiqueError("bad-candidates", "n_candidates must be at least 1")
        keep = scorer.rank(scores)[:n_candidates]
        keep = np.sort(keep)
        all_rows, latents = all_rows[keep], latents[keep]
    session = Session(
        session_id=session_id or f"s-{user_id}-{int(time.time() * 1000)}",
        user_id=user_id,
        user_row=user_row,
        candidate_rows=all_rows,
        base_latents=latents.copy(),
        latents=latents.copy(),
        scores=np.zeros(len(all_rows)),
        explanation_bits=np.zeros((len(all_rows), scorer.net.n_keyphrases)),
        ranking=np.arange(len(all_rows)),
    )
    _score_and_rank(scorer, session, generate_text)
    return session


def rerank_after_critique(
    scorer: Scorer,
    session: Session,
    edits,
    params: CritiqueParams,
    generate_text: bool = True,
    timestamp: float | None = None,
) -> Session:
    """Validate edits against the displayed explanation, edit every
    candidate's latent toward its own per-item target, re-rank."""
    edits = list(edits)
    top = session.top_position
    # validation happens once, against what the user actually saw
    make_critique_vector(session.explanation_bits[top], edits)
    if edits:
        targets = impose_edits(session.explanation_bits, edits)
        new_latents, traces = apply_critique_batch(scorer.net, session.latents, targets, params)
        session.latents = new_latents
        session.last_traces = traces
    now = time.time() if timestamp is None else timestamp
    for index, action in edits:
        session.history.append(CritiqueEvent(int(index), action, now))
    _score_and_rank(scorer, session, generate_text)
    return session


def reset_session(scorer: Scorer, session: Session, generate_text: bool = True) -> Session:
    session.latents = session.base_latents.copy()
    session.history = []
    session.last_traces = None
    _score_and_rank(scorer, session, generate_text)
    return session


@dataclass
class StepOutcome:
    saturated: bool
    keyphrase_index: int | None
    metrics: dict | None
    justification: list


def multistep_step(
    scorer: Scorer,
    session: Session,
    target_row: int,
    target_bits: np.ndarray,
    rng: np.random.Generator,
    params: CritiqueParams,
    generate_text: bool = False,
) -> StepOutcome:
    """One simulated preference-building step toward a liked target item.

    Picks (seeded) one target keyphrase missing from the displayed
    explanation, issues it as an add-critique, and re-ranks. The caller
    evaluates the session afterwards; a user whose displayed set already
    covers the target's keyphrases is flagged saturated and left as-is.
    """
    displayed = session.explanation_bits[session.top_position]
    candidates = np.nonzero((np.asarray(target_bits) > 0) & (displayed == 0))[0]
    if len(candidates) == 0:
        return StepOutcome(saturated=True, keyphrase_index=None, metrics=None,
                           justification=list(session.justification))
    pick = int(rng.choice(candidates))
    rerank_after_critique(scorer, session, [(pick, "add")], params, generate_text=generate_text)
    return StepOutcome(saturated=False, keyphrase_index=pick, metrics=None,
                       justification=list(session.justification))


# ------------------------------------------------------------- persistence


def write_session_snapshot(path, session: Session):
    """Line-delimited records: header, meta, history events, per-item latents."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps({"version": SNAPSHOT_VERSION, "kind": SNAPSHOT_KIND}) + "\n")
        meta = {
            "type": "meta",
            "session_id": session.session_id,
            "user_id": session.user_id,
            "user_row": session.user_row,
            "candidate_rows": session.candidate_rows.tolist(),
            "ranking": session.ranking.tolist(),
        }
        fh.write(json.dumps(meta, sort_keys=True) + "\n")
        for event in session.history:
            fh.write(json.dumps({"type": "event", **event.as_dict()}, sort_keys=True) + "\n")
        for pos, row in enumerate(session.candidate_rows.tolist()):
            rec = {
                "type": "latent",
                "item_row": row,
                "values": [float(v) for v in session.latents[pos]],
            }
            fh.write(json.dumps(rec, sort_keys=True) + "\n")


def read_session_snapshot(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        header = json.loads(fh.readline())
        if header.get("kind") != SNAPSHOT_KIND or header.get("version") != SNAPSHOT_VERSION:
            raise ValueError(f"not a session snapshot: {header!r}")
        meta = None
        events = []
        latents = {}
        for line in fh:
            rec = json.loads(line)
            if rec["type"] == "meta":
                meta = rec
            elif rec["type"] == "event":
                events.append(rec)
            elif rec["type"] == "latent":
                latents[rec["item_row"]] = rec["values"]
    return {"meta": meta, "events": events, "latents": latents}
