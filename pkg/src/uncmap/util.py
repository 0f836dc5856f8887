"""Small shared helpers: seeded sub-streams and file checksums."""

from __future__ import annotations

import hashlib
from pathlib import Path

import numpy as np


def substream(seed: int, name: str) -> np.random.Generator:
    """Derive a named, independent random stream from one master seed.

    The same (seed, name) pair always yields the same stream, so pipeline
    stages can be re-run individually without perturbing each other.
    """
    tag = int.from_bytes(hashlib.sha256(name.encode("utf-8")).digest()[:8], "big")
    return np.random.default_rng(np.random.SeedSequence([int(seed), tag]))


def substream_seed(seed: int, name: str) -> int:
    """64-bit child seed for APIs that take an integer seed."""
    tag = int.from_bytes(hashlib.sha256(name.encode("utf-8")).digest()[:8], "big")
    return int(np.random.SeedSequence([int(seed), tag]).generate_state(1, np.uint64)[0])


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def sha256_tree(root) -> dict:
    """Checksums of every regular file under ``root``, keyed by relative path."""
    root = Path(root)
    out = {}
    for p in sorted(root.rglob("*")):
        if p.is_file():
            out[str(p.relative_to(root))] = sha256_file(p)
    return out
