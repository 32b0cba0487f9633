"""Run manifests: enough recorded state to reproduce any command."""

from __future__ import annotations

import hashlib
import json
import time
from dataclasses import dataclass, field
from pathlib import Path

MANIFEST_VERSION = 1


def sha256_file(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def hash_inputs(paths) -> dict:
    """Content hash per input file; directories hash their sorted files."""
    out = {}
    for item in paths:
        p = Path(item)
        if p.is_dir():
            for child in sorted(p.rglob("*")):
                if child.is_file():
                    out[str(child)] = sha256_file(child)
        elif p.is_file():
            out[str(p)] = sha256_file(p)
    return out


@dataclass
class RunManifest:
    command: str
    config: dict
    seed: int | None
    started_at: float
    finished_at: float | None = None
    outputs: list = field(default_factory=list)
    input_hashes: dict = field(default_factory=dict)

    @classmethod
    def start(cls, command: str, config: dict, seed: int | None, inputs=()) -> "RunManifest":
        return cls(command=command, config=config, seed=seed,
                   started_at=time.time(), input_hashes=hash_inputs(inputs))

    def finish(self, outputs) -> "RunManifest":
        self.finished_at = time.time()
        self.outputs = [str(p) for p in outputs]
        return self

    def write(self, path) -> None:
        body = {
            "version": MANIFEST_VERSION,
            "command": self.command,
            "config": self.config,
            "seed": self.seed,
            "started_at": self.started_at,
            "finished_at": self.finished_at,
            "outputs": self.outputs,
            "input_hashes": self.input_hashes,
        }
        Path(path).write_text(json.dumps(body, indent=2, sort_keys=True) + "\n")


def read_manifest(path) -> dict:
    return json.loads(Path(path).read_text())
