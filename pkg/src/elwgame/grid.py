"""Deterministic quasi-uniform point sets on S^3 and S^2.

The S^3 lattice uses Hopf coordinates ``(eta, xi1, xi2)`` with
``sin^2 eta``, ``xi1`` and ``xi2`` uniform, which makes the induced measure
uniform.  Points come from an additive recurrence in the unit cube (the R3
sequence built on the root of ``x^4 = x + 1``), shifted by seed-derived offsets.
"""

from functools import lru_cache

import numpy as np

from .quaternion import binary_octahedral


def _r3_alphas():
    g = 1.0
    for _ in range(64):
        g = (1.0 + g) ** 0.25
    return np.array([1 / g, 1 / g**2, 1 / g**3])


def hopf_to_quaternion(s, xi1, xi2):
    """Unit quaternions from Hopf coordinates with ``s = sin^2 eta``."""
    c, d = np.sqrt(1.0 - s), np.sqrt(s)
    return np.stack([c * np.cos(xi1), c * np.sin(xi1), d * np.cos(xi2), d * np.sin(xi2)], axis=-1)


def s3_lattice(K, seed=0):
    """``K`` quasi-uniform unit quaternions, deterministic in ``(K, seed)``."""
    if K < 1:
        raise ValueError(f"grid size must be positive, got {K}")
    offsets = np.random.default_rng(seed).random(3)
    u = (offsets + np.arange(K)[:, None] * _r3_alphas()) % 1.0
    return hopf_to_quaternion(u[:, 0], 2 * np.pi * u[:, 1], 2 * np.pi * u[:, 2])


@lru_cache(maxsize=8)
def oracle_grid(K, seed=0):
    """The lattice plus the 48 binary-octahedral points (axes, edge midpoints, cell centres)."""
    G = np.vstack([s3_lattice(K, seed), binary_octahedral()])
    G.flags.writeable = False
    return G


@lru_cache(maxsize=8)
def covering_radius(K, seed=0, probes=20000):
    """Estimated angular covering radius of ``oracle_grid(K, seed)`` on S^3 modulo +-1.

    Payoffs are even in each quaternion, so ``q`` and ``-q`` are identified and
    distances use ``arccos |<g, x>|``.  The estimate is the worst nearest-point
    distance over a fixed set of random probes, so it slightly underestimates
    the true radius.
    """
    G = oracle_grid(K, seed)
    rng = np.random.default_rng(10_000 + seed)
    P = rng.normal(size=(probes, 4))
    P /= np.linalg.norm(P, axis=1, keepdims=True)
    worst = 1.0
    for chunk in np.array_split(P, max(1, probes // 2000)):
        worst = min(worst, float(np.abs(chunk @ G.T).max(axis=1).min()))
    return float(np.arccos(min(1.0, worst)))


def fibonacci_s2(n):
    """``n`` points of the spherical Fibonacci lattice as pure-imaginary unit quaternions."""
    if n < 1:
        raise ValueError(f"need at least one point, got {n}")
    k = np.arange(n) + 0.5
    z = 1.0 - 2.0 * k / n
    phi = np.pi * (3.0 - np.sqrt(5.0)) * k
    r = np.sqrt(1.0 - z * z)
    return np.stack([np.zeros(n), r * np.cos(phi), r * np.sin(phi), z], axis=-1)
