"""Deterministic RNG substreams.

Every random draw in the package flows from a single top-level seed through
named substreams, so stages can be re-run (or run in isolation) without
perturbing each other's randomness.
"""

from __future__ import annotations

import hashlib

import numpy as np


def _scope_int(token) -> int:
    if isinstance(token, (int, np.integer)):
        return int(token) & 0xFFFFFFFFFFFFFFFF
    digest = hashlib.sha256(str(token).encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little")


def substream(seed: int, *scope) -> np.random.Generator:
    """Generator for the substream named by `scope` under `seed`.

    Same (seed, scope) always yields the same stream; distinct scopes are
    statistically independent.
    """
    entropy = [int(seed) & 0xFFFFFFFFFFFFFFFF] + [_scope_int(s) for s in scope]
    return np.random.default_rng(np.random.SeedSequence(entropy))
