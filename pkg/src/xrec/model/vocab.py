"""Token vocabulary with fixed special ids."""

from __future__ import annotations

from dataclasses import dataclass, field

PAD_ID = 0
BOS_ID = 1
EOS_ID = 2
UNK_ID = 3

_SPECIALS = ("<pad>", "<bos>", "<eos>", "<unk>")


@dataclass(frozen=True)
class TokenVocab:
    tokens: tuple[str, ...]
    index: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        if tuple(self.tokens[:4]) != _SPECIALS:
            raise ValueError("vocabulary must start with the reserved tokens")
        object.__setattr__(self, "index", {t: i for i, t in enumerate(self.tokens)})
        if len(self.index) != len(self.tokens):
            raise ValueError("duplicate token in vocabulary")

    def __len__(self) -> int:
        return len(self.tokens)

    @classmethod
    def from_corpus(cls, token_seqs, extra_tokens=()) -> "TokenVocab":
        """Sorted unique tokens after the reserved ones.

        ``extra_tokens`` exists for keyphrase lemmas, which must be
        encodable even when only inflected forms occur in the text.
        """
        seen = set(extra_tokens)
        for seq in token_seqs:
            seen.update(seq)
        seen -= set(_SPECIALS)
        return cls(tokens=_SPECIALS + tuple(sorted(seen)))

    def encode(self, tokens) -> list[int]:
        idx = self.index
        return [idx.get(t, UNK_ID) for t in tokens]

    def decode(self, ids, strip_specials: bool = True) -> list[str]:
        out = []
        for i in ids:
            if strip_specials and i in (PAD_ID, BOS_ID, EOS_ID):
                continue
            out.append(self.tokens[i] if 0 <= i < len(self.tokens) else "<unk>")
        return out
