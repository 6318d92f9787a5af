"""Discrete mixed strategies on the unit-quaternion sphere.

Payoffs against a mixed strategy depend on it only through its second-moment
matrix ``S = sum_k w_k q_k q_k^T``, so every measure is payoff-equivalent to
the spectral one: eigenvectors of ``S`` played with its eigenvalues as
probabilities.  Within a degenerate eigenvalue the eigenvectors can be rotated
freely, so canonical supports are unique only up to that rotation.
"""

from dataclasses import dataclass, field

import numpy as np

from .engine import ELW_PAYOFFS, payoff_grid
from .linalg import symmetric_eigensolve

WEIGHT_TOL = 1e-12
UNIT_TOL = 1e-12
ORTHO_TOL = 1e-10
DROP_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class MixedStrategy:
    """Probability weights on unit quaternions (one per row of ``points``)."""

    weights: np.ndarray
    points: np.ndarray
    canonical: bool = field(default=False, repr=False)

    def __post_init__(self):
        w = np.atleast_1d(np.asarray(self.weights, dtype=float))
        P = np.atleast_2d(np.asarray(self.points, dtype=float))
        if P.shape != (len(w), 4):
            raise ValueError(f"need one 4-vector per weight, got {P.shape} for {len(w)} weights")
        if len(w) == 0:
            raise ValueError("a mixed strategy needs at least one atom")
        if np.any(w < -WEIGHT_TOL) or abs(w.sum() - 1.0) > WEIGHT_TOL:
            raise ValueError(f"weights must be nonnegative and sum to 1, got {w}")
        if np.any(np.abs(np.linalg.norm(P, axis=1) - 1.0) > UNIT_TOL):
            raise ValueError("every support point must be a unit quaternion")
        w.flags.writeable = False
        P.flags.writeable = False
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "points", P)

    @classmethod
    def from_atoms(cls, atoms):
        """Build from ``[(weight, quaternion), ...]``."""
        atoms = list(atoms)
        return cls([w for w, _ in atoms], [q for _, q in atoms])

    def __len__(self):
        return len(self.weights)

    def atoms(self):
        return list(zip(self.weights, self.points))

    def to_json(self):
        out = {"atoms": [{"w": float(w), "q": [float(x) for x in q]} for w, q in self.atoms()]}
        if self.canonical:
            out["canonical"] = True
        return out

    @classmethod
    def from_json(cls, data):
        try:
            atoms = data["atoms"]
            return cls([a["w"] for a in atoms], [a["q"] for a in atoms])
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed strategy JSON: {exc}") from exc


class CanonicalStrategy(MixedStrategy):
    """At most four mutually orthonormal supports with positive probability."""

    def __init__(self, probs, supports):
        super().__init__(probs, supports, canonical=True)

    def __post_init__(self):
        super().__post_init__()
        P = self.points
        if len(P) > 4 or np.abs(P @ P.T - np.eye(len(P))).max() > ORTHO_TOL:
            raise ValueError("canonical supports must be at most four orthonormal quaternions")

    @property
    def probs(self):
        return self.weights

    @property
    def supports(self):
        return self.points


def point_mass(q):
    return MixedStrategy([1.0], [q])


def uniform(points):
    points = np.atleast_2d(points)
    return MixedStrategy(np.full(len(points), 1.0 / len(points)), points)


def second_moment(nu):
    """``S = sum_k w_k q_k q_k^T`` (symmetric, PSD, unit trace)."""
    return np.einsum("k,ka,kb->ab", nu.weights, nu.points, nu.points)


def canonicalize(nu, drop_tol=DROP_TOL):
    """Spectral form of ``nu``: eigenvalues of ``S`` as probabilities on its eigenvectors."""
    if isinstance(nu, CanonicalStrategy):
        return nu
    w, V = symmetric_eigensolve(second_moment(nu))
    keep = w > drop_tol
    probs = w[keep] / w[keep].sum()
    return CanonicalStrategy(probs, V[:, keep].T)


def equivalence_check(nu1, nu2, tol=1e-10):
    """True when the two measures give identical payoffs against every opponent."""
    return bool(np.abs(second_moment(nu1) - second_moment(nu2)).max() < tol)


def mixed_payoff(mu, nu, X=ELW_PAYOFFS):
    """Expected ``($A, $B)`` when Alice plays ``mu`` and Bob plays ``nu``."""
    pay_a, pay_b = payoff_grid(mu.points[:, None, :], nu.points[None, :, :], X)
    joint = np.outer(mu.weights, nu.weights)
    return float(np.sum(joint * pay_a)), float(np.sum(joint * pay_b))
