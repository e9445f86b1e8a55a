"""Seeding and accumulation helpers shared by the Monte Carlo estimators.

Estimators draw their samples in shards.  Each shard gets its own generator
spawned from one root ``SeedSequence``, so a result depends only on
(seed, shards) and not on the order in which shards are evaluated.  Shard
partial sums are merged with ``math.fsum``.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np

CHUNK = 1_000_000


@dataclass(frozen=True)
class MCEstimate:
    value: float
    stderr: float
    samples: int

    def within(self, target: float, nsigma: float = 3.0) -> bool:
        return abs(self.value - target) <= nsigma * self.stderr

    def agrees_with(self, other: "MCEstimate", nsigma: float = 3.0) -> bool:
        combined = math.hypot(self.stderr, other.stderr)
        return abs(self.value - other.value) <= nsigma * combined


def task_seed(root: int, name: str) -> int:
    """Stable 64-bit seed for a named task derived from a root seed."""
    digest = hashlib.sha256(f"{int(root)}:{name}".encode()).digest()
    return int.from_bytes(digest[:8], "little")


def shard_generators(rng, shards: int = 1) -> list[np.random.Generator]:
    """Independent generators for each shard.

    ``rng`` may be an int seed, a SeedSequence or a Generator.  A Generator is
    used as-is for a single shard and split with ``spawn`` otherwise.
    """
    if shards < 1:
        raise ValueError("shards must be positive")
    if isinstance(rng, np.random.Generator):
        return [rng] if shards == 1 else list(rng.spawn(shards))
    ss = rng if isinstance(rng, np.random.SeedSequence) else np.random.SeedSequence(int(rng))
    return [np.random.default_rng(child) for child in ss.spawn(shards)]


def split_counts(total: int, parts: int) -> list[int]:
    base, extra = divmod(int(total), parts)
    return [base + (i < extra) for i in range(parts)]


def sharded_mean(
    draw: Callable[[np.random.Generator, int], np.ndarray],
    samples: int,
    rng,
    shards: int = 1,
    scale: float = 1.0,
) -> MCEstimate:
    """Mean of ``scale * draw(gen, n)`` over ``samples`` draws, with stderr.

    ``draw`` returns one weight per sample (zero for rejected samples).
    """
    if samples <= 0:
        raise ValueError("samples must be positive")
    sums: list[float] = []
    squares: list[float] = []
    for gen, count in zip(shard_generators(rng, shards), split_counts(samples, shards)):
        for n in _chunks(count):
            vals = np.asarray(draw(gen, n), dtype=float)
            sums.append(math.fsum(vals))
            squares.append(math.fsum(vals * vals))
    mean = math.fsum(sums) / samples
    var = max(math.fsum(squares) / samples - mean * mean, 0.0)
    stderr = math.sqrt(var / max(samples - 1, 1))
    return MCEstimate(scale * mean, abs(scale) * stderr, samples)


def _chunks(count: int) -> Iterable[int]:
    while count > 0:
        n = min(count, CHUNK)
        yield n
        count -= n
