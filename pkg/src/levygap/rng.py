"""Counter-based random streams keyed by (seed, kind, purpose, block).

Paths are generated in fixed blocks of ``BLOCK`` consecutive path indices.
Each block owns one Philox generator per purpose, derived from the master
seed through ``SeedSequence`` spawn keys, so path ``i`` is a function of
``(seed, i)`` alone: the number of workers, the order in which blocks are
evaluated and the total path count never change it.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

BLOCK = 256

_KINDS = {"path": 0, "term": 1}
_PURPOSES = {
    "diffusion": 0,
    "jumps": 1,
    "bridge_interior": 2,
    "bridge_max": 3,
    "bridge_max_jump": 4,
    "bridge_min": 5,
    "bridge_min_jump": 6,
    "increment": 7,
    "subordinator": 8,
    "stable": 9,
}


@dataclass(frozen=True)
class RngStreamSpec:
    master_seed: int
    stream_kind: str = "path"

    def __post_init__(self):
        if self.stream_kind not in _KINDS:
            raise ValueError(f"unknown stream kind {self.stream_kind!r}")
        if not 0 <= int(self.master_seed) < 2**64:
            raise ValueError("master_seed must be a 64-bit unsigned integer")

    def generator(self, purpose: str, block: int) -> np.random.Generator:
        key = (_KINDS[self.stream_kind], _PURPOSES[purpose], int(block))
        ss = np.random.SeedSequence(entropy=int(self.master_seed), spawn_key=key)
        return np.random.Generator(np.random.Philox(ss))


def blocks_for(paths: int):
    """Block indices covering ``paths`` path indices, and the row count used from each."""
    full, rest = divmod(int(paths), BLOCK)
    out = [(b, BLOCK) for b in range(full)]
    if rest:
        out.append((full, rest))
    return out
