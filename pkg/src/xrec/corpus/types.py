"""Domain types for the review corpus."""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass
class Review:
    review_id: str
    user_id: str
    item_id: str
    timestamp: int
    overall_rating: float
    aspect_ratings: dict[str, float]
    tokens: list[str]
    # (aspect, start, end) with end exclusive, indices into tokens
    marker_spans: list[tuple[str, int, int]] = field(default_factory=list)


@dataclass(frozen=True)
class Justification:
    tokens: tuple[str, ...]
    aspect: str
    source_review: str


@dataclass(frozen=True)
class JustificationReference:
    """Fixed-size sample of an owner's training justifications."""

    owner: str
    justifications: tuple[Justification, ...]


@dataclass(frozen=True)
class KeyphraseVocabulary:
    """Ordered (keyphrase, aspect) entries; index order is the wire order."""

    entries: tuple[tuple[str, str], ...]

    def __post_init__(self):
        if len(set(self.entries)) != len(self.entries):
            raise ValueError("duplicate keyphrase entries")

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def phrases(self) -> list[str]:
        return [p for p, _ in self.entries]

    @property
    def aspects(self) -> list[str]:
        return [a for _, a in self.entries]

    def index_of(self, phrase: str) -> int:
        return self.phrases.index(phrase)


@dataclass
class Interaction:
    user_id: str
    item_id: str
    review_id: str
    timestamp: int
    label: int  # binarized rating
    keyphrase_vector: list[int]  # 0/1, length K
    target_justifications: list[tuple[str, ...]]  # up to 2 token sequences
    split: str  # train | valid | test


class CorpusError(Exception):
    """Raised with a stable reason code as the first argument."""

    def __init__(self, reason: str, detail: str = ""):
        self.reason = reason
        self.detail = detail
        super().__init__(f"{reason}: {detail}" if detail else reason)
