"""Deterministic seed derivation.

Every random draw in the package is keyed by a chain of integers fed
through a splitmix64 mix, so results are independent of execution order,
platform and Python hash randomization.
"""

from __future__ import annotations

_MASK64 = (1 << 64) - 1


def _splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def mix64(*parts: int) -> int:
    """Fold integer parts into a single 64-bit sub-seed."""
    h = 0
    for p in parts:
        h = _splitmix64((h ^ (int(p) & _MASK64)) & _MASK64)
    return h
