"""Corpus artifact files.

Every artifact is UTF-8 line-delimited JSON whose first line is a header
record carrying the format version and the artifact kind; the remaining
lines are one record each.  Writers are deterministic: same inputs, same
bytes.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .synthetic import SyntheticGroundTruth
from .types import KeyphraseVocabulary, Review

FORMAT_VERSION = 1


def _dump(obj) -> str:
    return json.dumps(obj, ensure_ascii=False, separators=(",", ":"), sort_keys=True)


def _write_lines(path: Path, kind: str, records) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(_dump({"version": FORMAT_VERSION, "kind": kind}) + "\n")
        for rec in records:
            fh.write(_dump(rec) + "\n")


def _read_lines(path: Path, kind: str) -> list[dict]:
    with open(path, encoding="utf-8") as fh:
        header = json.loads(fh.readline())
        if header.get("kind") != kind:
            raise ValueError(f"{path}: expected {kind} file, got {header.get('kind')!r}")
        if header.get("version") != FORMAT_VERSION:
            raise ValueError(f"{path}: unsupported version {header.get('version')!r}")
        return [json.loads(line) for line in fh if line.strip()]


def write_reviews(path: str | Path, reviews: list[Review]) -> None:
    _write_lines(
        Path(path),
        "corpus",
        (
            {
                "review_id": r.review_id,
                "user_id": r.user_id,
                "item_id": r.item_id,
                "timestamp": r.timestamp,
                "overall_rating": r.overall_rating,
                "aspect_ratings": r.aspect_ratings,
                "tokens": r.tokens,
                "marker_spans": [[a, s, e] for a, s, e in r.marker_spans],
            }
            for r in reviews
        ),
    )


def read_reviews(path: str | Path) -> list[Review]:
    return [
        Review(
            review_id=rec["review_id"],
            user_id=rec["user_id"],
            item_id=rec["item_id"],
            timestamp=rec["timestamp"],
            overall_rating=rec["overall_rating"],
            aspect_ratings=rec["aspect_ratings"],
            tokens=rec["tokens"],
            marker_spans=[(a, s, e) for a, s, e in rec["marker_spans"]],
        )
        for rec in _read_lines(Path(path), "corpus")
    ]


def write_vocab(path: str | Path, vocab: KeyphraseVocabulary) -> None:
    _write_lines(
        Path(path),
        "keyphrases",
        ({"keyphrase": p, "aspect": a} for p, a in vocab.entries),
    )


def read_vocab(path: str | Path) -> KeyphraseVocabulary:
    entries = tuple(
        (rec["keyphrase"], rec["aspect"]) for rec in _read_lines(Path(path), "keyphrases")
    )
    return KeyphraseVocabulary(entries=entries)


def write_split(path: str | Path, assignment: dict[str, str]) -> None:
    _write_lines(
        Path(path),
        "split",
        ({"review_id": rid, "split": tag} for rid, tag in sorted(assignment.items())),
    )


def read_split(path: str | Path) -> dict[str, str]:
    return {rec["review_id"]: rec["split"] for rec in _read_lines(Path(path), "split")}


def write_ground_truth(path: str | Path, truth: SyntheticGroundTruth) -> None:
    doc = {
        "version": FORMAT_VERSION,
        "kind": "ground-truth",
        "aspects": truth.aspects,
        "keyphrases": truth.keyphrases,
        "user_ids": truth.user_ids,
        "item_ids": truth.item_ids,
        "user_prefs": truth.user_prefs.tolist(),
        "item_quals": truth.item_quals.tolist(),
    }
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(_dump(doc) + "\n", encoding="utf-8")


def read_ground_truth(path: str | Path) -> SyntheticGroundTruth:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    if doc.get("kind") != "ground-truth":
        raise ValueError(f"{path}: not a ground-truth file")
    user_prefs = np.asarray(doc["user_prefs"], dtype=np.float64)
    item_quals = np.asarray(doc["item_quals"], dtype=np.float64)
    return SyntheticGroundTruth(
        aspects=doc["aspects"],
        keyphrases=doc["keyphrases"],
        user_prefs=user_prefs,
        item_quals=item_quals,
        scores=user_prefs @ item_quals.T,
        user_ids=doc["user_ids"],
        item_ids=doc["item_ids"],
    )
