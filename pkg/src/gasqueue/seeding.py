"""Named, reproducible random substreams derived from one root seed."""

from __future__ import annotations

import hashlib

import numpy as np


def substream_seed(root_seed: int, name: str) -> np.random.SeedSequence:
    """A seed sequence for the component ``name``, stable across runs.

    The name is hashed so components draw from independent streams no
    matter the order in which they are created.
    """
    digest = hashlib.sha256(name.encode()).digest()
    key = tuple(int.from_bytes(digest[i:i + 4], "little") for i in range(0, 16, 4))
    return np.random.SeedSequence(entropy=root_seed, spawn_key=key)


def substream(root_seed: int, name: str) -> np.random.Generator:
    return np.random.default_rng(substream_seed(root_seed, name))
