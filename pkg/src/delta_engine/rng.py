"""Portable seeded normal variates.

The generator is pinned so that a seed reproduces the same path in any
language, independent of NumPy's default bit generator:

* uniforms: SplitMix64 (Steele, Lea & Flood 2014; Vigna's reference
  constants). Output ``k`` (0-based) is ``mix(seed + (k + 1) * GAMMA)``
  modulo 2**64, which is identical to stepping the sequential generator.
  A 64-bit output ``z`` maps to ``(z >> 11) * 2**-53`` in [0, 1).
* normals: Box-Muller on consecutive uniform pairs ``(u1, u2)``::

      r = sqrt(-2 * ln(1 - u1))
      z[2j]     = r * cos(2 * pi * u2)
      z[2j + 1] = r * sin(2 * pi * u2)

  ``1 - u1`` lies in (0, 1], so the log is always finite.
"""

from __future__ import annotations

import numpy as np

GAMMA = 0x9E3779B97F4A7C15
MIX1 = 0xBF58476D1CE4E5B9
MIX2 = 0x94D049BB133111EB
MASK64 = (1 << 64) - 1


def splitmix64(seed: int, n: int) -> np.ndarray:
    """First ``n`` SplitMix64 outputs for ``seed`` as a uint64 array."""
    if not 0 <= seed <= MASK64:
        raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
    k = np.arange(1, n + 1, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = np.uint64(seed) + k * np.uint64(GAMMA)
        z = (z ^ (z >> np.uint64(30))) * np.uint64(MIX1)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(MIX2)
        z = z ^ (z >> np.uint64(31))
    return z


def uniforms(seed: int, n: int) -> np.ndarray:
    return (splitmix64(seed, n) >> np.uint64(11)).astype(np.float64) * 2.0**-53


def standard_normals(seed: int, n: int) -> np.ndarray:
    """``n`` standard normal variates from the pinned generator."""
    pairs = (n + 1) // 2
    u = uniforms(seed, 2 * pairs)
    r = np.sqrt(-2.0 * np.log(1.0 - u[0::2]))
    theta = 2.0 * np.pi * u[1::2]
    z = np.empty(2 * pairs)
    z[0::2] = r * np.cos(theta)
    z[1::2] = r * np.sin(theta)
    return z[:n]
