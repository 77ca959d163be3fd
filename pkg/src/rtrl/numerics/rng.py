"""Deterministic random streams with named substreams.

A single experiment seed fans out into independent generators, one per
component ("env", "actor", "buffer", ...), so reordering draws in one
component never perturbs another.  Substream derivation hashes the name,
which keeps the mapping stable across runs and processes.
"""

from __future__ import annotations

import hashlib

import numpy as np

__all__ = ["RngStream", "rng_stream"]


def _name_key(name: str) -> tuple[int, int]:
    digest = hashlib.blake2s(name.encode("utf-8"), digest_size=8).digest()
    return (
        int.from_bytes(digest[:4], "little"),
        int.from_bytes(digest[4:], "little"),
    )


class RngStream:
    """numpy Generator plus a deterministic substream tree."""

    __slots__ = ("seed", "path", "generator")

    def __init__(self, seed: int, path: tuple[int, ...] = ()):
        self.seed = int(seed)
        self.path = path
        self.generator = np.random.default_rng(np.random.SeedSequence(self.seed, spawn_key=path))

    def substream(self, name: str) -> "RngStream":
        return RngStream(self.seed, self.path + _name_key(name))

    # delegation to the most used Generator methods
    def normal(self, loc=0.0, scale=1.0, size=None):
        return self.generator.normal(loc, scale, size)

    def uniform(self, low=0.0, high=1.0, size=None):
        return self.generator.uniform(low, high, size)

    def random(self, size=None):
        return self.generator.random(size)

    def integers(self, low, high=None, size=None):
        return self.generator.integers(low, high, size)

    def choice(self, a, size=None, p=None):
        return self.generator.choice(a, size=size, p=p)

    def __repr__(self) -> str:
        return f"RngStream(seed={self.seed}, path={self.path})"


def rng_stream(seed: int) -> RngStream:
    """Root stream for an experiment seed."""
    return RngStream(seed)
