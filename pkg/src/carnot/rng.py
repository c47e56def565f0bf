"""Counter-based random streams.

Samples are produced in fixed blocks of ``BLOCK`` indices.  Block ``b`` of
stream ``(seed, stream_id)`` is generated by a Philox generator keyed by
``(seed, stream_id)`` with the block number in the top counter word, so any
sample is a pure function of ``(seed, stream_id, index)`` no matter how the
index range is split across workers.
"""

from __future__ import annotations

import hashlib
import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

BLOCK = 1024
_MASK64 = (1 << 64) - 1


def stable_hash64(*parts) -> int:
    h = hashlib.blake2b(digest_size=8)
    for p in parts:
        b = str(p).encode()
        h.update(struct.pack("<I", len(b)))
        h.update(b)
    return int.from_bytes(h.digest(), "little")


@dataclass(frozen=True)
class SamplerStream:
    root_seed: int
    stream_id: int = 0

    def __post_init__(self):
        if not 0 <= int(self.root_seed) <= _MASK64:
            raise ValueError("root seed must be an unsigned 64-bit integer")
        object.__setattr__(self, "root_seed", int(self.root_seed))
        object.__setattr__(self, "stream_id", int(self.stream_id) & _MASK64)

    def child(self, tag) -> SamplerStream:
        """Independent sub-stream, e.g. one per convolution factor."""
        return SamplerStream(self.root_seed, stable_hash64(self.stream_id, tag))

    def generator(self, block: int) -> np.random.Generator:
        key = self.root_seed | (self.stream_id << 64)
        return np.random.Generator(np.random.Philox(key=key, counter=int(block) << 192))

    @classmethod
    def for_task(cls, root_seed: int, task_name: str, ordinal: int) -> SamplerStream:
        return cls(root_seed, stable_hash64("task", task_name, ordinal))


def block_range(start: int, count: int) -> range:
    if count <= 0:
        return range(0)
    return range(start // BLOCK, (start + count - 1) // BLOCK + 1)


def map_blocks(fn, blocks, threads: int = 1) -> list:
    """``[fn(b) for b in blocks]``, optionally on a thread pool; order is kept."""
    blocks = list(blocks)
    if threads <= 1 or len(blocks) <= 1:
        return [fn(b) for b in blocks]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, blocks))


def gather(block_fn, start: int, count: int, threads: int = 1) -> np.ndarray:
    """Rows ``start .. start+count-1`` from a ``block -> (BLOCK, ...)`` function."""
    blocks = block_range(start, count)
    if not blocks:
        return np.zeros((0,))
    parts = map_blocks(block_fn, blocks, threads)
    full = np.concatenate(parts, axis=0)
    offset = start - blocks[0] * BLOCK
    return full[offset: offset + count]
