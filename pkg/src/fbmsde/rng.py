"""Reproducible random substreams.

Every draw in the package comes from a Philox (counter-based) generator keyed
by ``(seed, purpose, path_index, component)``. The key fully determines the
stream, so batch order and worker count never change results.
"""

from __future__ import annotations

import numpy as np

PURPOSE = {"fbm": 1, "bm": 2, "x0": 3, "probe": 4, "corpus": 5, "misc": 9}


def stream(seed: int, purpose: str, path_index: int = 0, component: int = 0) -> np.random.Generator:
    """Independent generator for one ``(purpose, path_index, component)`` slot."""
    if seed < 0:
        raise ValueError(f"seed must be non-negative, got {seed}")
    key = (PURPOSE[purpose], int(path_index), int(component))
    ss = np.random.SeedSequence(entropy=int(seed) & (2**64 - 1), spawn_key=key)
    return np.random.Generator(np.random.Philox(ss))


def normals(seed: int, purpose: str, path_index: int, component: int, size: int) -> np.ndarray:
    return stream(seed, purpose, path_index, component).standard_normal(size)
