from .core import (
    CritiqueError,
    CritiqueParams,
    CritiqueTrace,
    apply_critique,
    apply_critique_batch,
    impose_edits,
    make_critique_vector,
)
from .session import (
    CritiqueEvent,
    Session,
    StepOutcome,
    multistep_step,
    read_session_snapshot,
    rerank_after_critique,
    reset_session,
    start_session,
    write_session_snapshot,
)

__all__ = [
    "CritiqueError",
    "CritiqueEvent",
    "CritiqueParams",
    "CritiqueTrace",
    "Session",
    "StepOutcome",
    "apply_critique",
    "apply_critique_batch",
    "impose_edits",
    "make_critique_vector",
    "multistep_step",
    "read_session_snapshot",
    "rerank_after_critique",
    "reset_session",
    "start_session",
    "write_session_snapshot",
]
