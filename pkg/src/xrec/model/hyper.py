"""Model hyperparameters with serialization for checkpoint headers."""

from __future__ import annotations

from dataclasses import asdict, dataclass


@dataclass
class HyperParams:
    d_model: int = 256
    d_ff: int = 1024
    n_layers: int = 2
    n_heads: int = 4
    dropout: float = 0.1
    n_just: int = 32
    max_just_len: int = 24
    top_m: int = 10
    lambda_rating: float = 1.0
    lambda_keyphrase: float = 1.0
    lambda_justification: float = 1.0
    label_smoothing: float = 0.1
    warmup: int = 4000
    lr_scale: float = 1.0
    batch_size: int = 128
    adam_beta1: float = 0.9
    adam_beta2: float = 0.98
    adam_eps: float = 1e-9

    def __post_init__(self):
        if self.d_model % self.n_heads != 0:
            raise ValueError("d_model must be divisible by n_heads")
        if not 0.0 <= self.dropout < 1.0:
            raise ValueError("dropout must be in [0, 1)")
        if not 0.0 <= self.label_smoothing < 1.0:
            raise ValueError("label_smoothing must be in [0, 1)")
        for name in ("d_model", "d_ff", "n_layers", "n_heads", "n_just", "max_just_len",
                     "top_m", "warmup", "batch_size"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, doc: dict) -> "HyperParams":
        return cls(**doc)
