"""
Counter-based random substreams.

Every stochastic draw is tied to ``(seed, stream, index)``: the Philox key is
``(seed, stream)`` and the sample index occupies the top word of the 256-bit
counter. Two substreams overlap only after 2**192 draws, so ensemble members
can be generated in any order, or in parallel, with bit-identical results.
"""
from enum import IntEnum

import numpy as np

_MASK64 = (1 << 64) - 1


class Stream(IntEnum):
    WHITE_NOISE = 1
    EXACT = 2
    EIGENFUNCTION = 3
    DISCRETE = 4
    WALK = 5
    CONDITION = 6
    EXTERIOR = 7


def substream(seed: int, stream: Stream, index: int = 0) -> np.random.Generator:
    """Return the generator for sample ``index`` of ``stream`` under ``seed``."""
    if not 0 <= seed <= _MASK64:
        raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
    if index < 0:
        raise ValueError(f"sample index must be nonnegative, got {index}")
    counter = np.array([0, 0, 0, index & _MASK64], dtype=np.uint64)
    key = np.array([seed, int(stream)], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(counter=counter, key=key))
