"""Deterministic random streams.

Every source of randomness in the package is derived from a single 64-bit
seed through named substreams, so adding clients (or reordering unrelated
draws) never perturbs the draws of existing ones.
"""

import numpy as np

# Fixed stream ids; extend with new names, never renumber.
_STREAMS = {
    "components": 1,
    "scores": 2,
    "noise": 3,
    "init": 4,
    "kmeans": 5,
    "trials": 6,
}

_MASK = (1 << 64) - 1


def substream(seed, stream, *keys):
    """Generator for the named substream of ``seed``.

    Extra integer ``keys`` (client id, trial index, ...) select independent
    children of the stream.
    """
    if stream not in _STREAMS:
        raise KeyError(f"unknown random stream {stream!r}")
    entropy = (int(seed) & _MASK, _STREAMS[stream]) + tuple(int(k) & _MASK for k in keys)
    return np.random.default_rng(np.random.SeedSequence(entropy))
