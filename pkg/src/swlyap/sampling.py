"""Deterministic direction sampling and the package's random-number policy.

Two distinct constructions live here:

* ``sphere_sequence`` -- a prefix-stable, asymptotically dense sequence of
  unit vectors used for synthesis samples and gap measurements.  In 2D it is
  a golden-angle sweep folded into [0, pi) so no two directions are
  antipodal; in 3D and above it maps a Weyl (Kronecker) low-discrepancy
  sequence through the inverse normal CDF and normalizes.
* ``probe_directions`` -- a fixed set of test directions for generator
  pruning: exactly equiangular in 2D, a Fibonacci spiral lattice on S^2,
  Weyl-normal in higher dimension.

All randomness elsewhere in the package goes through ``make_rng``, a
counter-based Philox generator, so every sampled routine is reproducible
from a single integer seed.
"""

from __future__ import annotations

import numpy as np
from scipy.special import ndtri

from .errors import ContractViolationError

GOLDEN_ANGLE = np.pi * (3.0 - np.sqrt(5.0))

# Square roots of the first primes: pairwise rationally independent shifts
# for the Weyl sequence in dimensions >= 3.
_WEYL_PRIMES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def make_rng(seed: int) -> np.random.Generator:
    """Counter-based generator; the only sanctioned randomness source."""
    return np.random.Generator(np.random.Philox(seed))


def sphere_sequence(n: int, count: int) -> np.ndarray:
    """First ``count`` terms of the deterministic unit-vector sequence.

    The sequence has the prefix property: ``sphere_sequence(n, a)`` equals
    the first ``a`` rows of ``sphere_sequence(n, b)`` for a < b.
    """
    if n < 2:
        raise ContractViolationError(f"dimension must be >= 2, got {n}")
    if count < 1:
        raise ContractViolationError(f"count must be >= 1, got {count}")
    if n == 2:
        # Golden-angle increments folded into [0, pi): dense, never antipodal.
        angles = np.mod(np.arange(count) * GOLDEN_ANGLE, np.pi)
        return np.column_stack([np.cos(angles), np.sin(angles)])
    shifts = np.sqrt(np.array(_WEYL_PRIMES[:n], dtype=float))
    idx = np.arange(1, count + 1, dtype=float)[:, None]
    u = np.mod(idx * shifts[None, :], 1.0)
    # Keep away from the CDF tails where ndtri blows up.
    u = 0.5 + (u - 0.5) * (1.0 - 1e-12)
    points = ndtri(u)
    norms = np.linalg.norm(points, axis=1, keepdims=True)
    return points / norms


def probe_directions(n: int, count: int = 256) -> np.ndarray:
    """Fixed probe set used by the generator-pruning test."""
    if n == 2:
        # Half-circle suffices: ||G(-u)|| = ||Gu||.
        angles = np.arange(count) * np.pi / count
        return np.column_stack([np.cos(angles), np.sin(angles)])
    if n == 3:
        # Fibonacci spiral lattice on S^2.
        i = np.arange(count, dtype=float)
        z = 1.0 - (2.0 * i + 1.0) / count
        r = np.sqrt(np.maximum(0.0, 1.0 - z * z))
        theta = i * GOLDEN_ANGLE
        return np.column_stack([r * np.cos(theta), r * np.sin(theta), z])
    return sphere_sequence(n, count)


def random_unit_vectors(n: int, count: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform random directions; Gaussian normalization."""
    points = rng.normal(size=(count, n))
    norms = np.linalg.norm(points, axis=1, keepdims=True)
    norms[norms == 0.0] = 1.0
    return points / norms
