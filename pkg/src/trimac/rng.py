"""Counter-based splittable random streams.

Every stochastic routine in the package takes an integer seed and derives
independent substreams from it by integer paths, so that any component can
be re-run in isolation (or in parallel) and reproduce exactly the same draws.
Philox is counter-based; distinct spawn keys give statistically independent
streams without coordination.
"""

from __future__ import annotations

import numpy as np

__all__ = ["stream"]


def stream(seed: int, *path: int) -> np.random.Generator:
    """Return the generator for substream `path` of master stream `seed`.

    Args:
        seed: master seed, any Python int >= 0.
        path: zero or more non-negative ints naming the substream.

    The same (seed, path) always yields the same generator state.
    """
    if seed < 0:
        raise ValueError("seed must be non-negative")
    key = tuple(int(p) for p in path)
    ss = np.random.SeedSequence(int(seed), spawn_key=key)
    return np.random.Generator(np.random.Philox(ss))
