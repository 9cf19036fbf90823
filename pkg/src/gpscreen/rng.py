"""Deterministic seeding utilities.

Every replicate, campaign suggestion and tree branch draws its randomness
from a stream derived with the helpers below, so a run is fully determined
by its master seed on any platform.

Two mechanisms are used:

* ``mix64`` folds integers into a single 64-bit seed with the splitmix64
  finalizer.  It is pure integer arithmetic, so the derivation is stable
  across platforms and Python versions.
* numpy ``Generator.spawn`` derives independent child streams for tree
  branches.  Children are spawned up front in ordinal order, so evaluating
  branches in any order (including in parallel) reproduces the sequential
  result.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def splitmix64(x: int) -> int:
    """One splitmix64 finalizer step on a 64-bit integer."""
    x = (x + _GOLDEN) & _MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (z ^ (z >> 31)) & _MASK64


def mix64(*values: int) -> int:
    """Fold any number of integers into one well-mixed 64-bit seed.

    Negative inputs are reduced modulo 2**64 first.  The result depends on
    the order of the arguments.
    """
    acc = _GOLDEN
    for v in values:
        acc = splitmix64((acc ^ (int(v) & _MASK64)) & _MASK64)
    return acc


def stream(*values: int) -> np.random.Generator:
    """A fresh PCG64 generator seeded from ``mix64`` of the arguments."""
    return np.random.default_rng(mix64(*values))
