"""Named, counter-based random streams.

Every stream is numpy's Philox4x64-10 bit generator keyed by
``(seed, stream)``. The counter starts at zero and is incremented before each
block, so the first four raw words are Philox applied to counter 1. Philox is a published
algorithm (Salmon et al., "Parallel random numbers: as easy as 1, 2, 3"), so
the raw 64-bit outputs can be reproduced outside numpy from the key alone.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1

# Stream ids keep the generator and each solver method independent.
STREAMS = {"generator": 0, "de": 1, "ga": 2, "ils": 3, "ts": 4, "tsde": 5, "costs": 6}


def make_rng(seed: int, stream: int | str = 0) -> np.random.Generator:
    """Return a Generator over Philox keyed by ``(seed mod 2**64, stream)``."""
    if isinstance(stream, str):
        stream = STREAMS[stream]
    key = np.array([seed & MASK64, stream & MASK64], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def raw_outputs(seed: int, stream: int, count: int) -> list[int]:
    """First ``count`` raw 64-bit words of a stream; used as published test vectors."""
    bg = make_rng(seed, stream).bit_generator
    return [int(v) for v in bg.random_raw(count)]
