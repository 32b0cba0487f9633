"""Command-line orchestration and run manifests."""

from .manifest import RunManifest, hash_inputs, read_manifest, sha256_file

__all__ = ["RunManifest", "hash_inputs", "read_manifest", "sha256_file"]
