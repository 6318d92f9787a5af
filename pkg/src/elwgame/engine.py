"""The ELW game: payoff data, entangling gate, and both payoff engines."""

import itertools
from dataclasses import dataclass

import numpy as np

from .quaternion import as_unit, inverse, mul, check_su2

ELW_PAYOFFS = (3.0, 5.0, 0.0, 1.0)

# sigma_y (x) sigma_y on the basis |CC>, |CD>, |DC>, |DD> (Alice's qubit first)
_SIGMA_Y = np.array([[0, -1j], [1j, 0]])
_YY = np.kron(_SIGMA_Y, _SIGMA_Y)


@dataclass(frozen=True)
class ClassicalPayoffs:
    """Outcomes ``X = (X0, X1, X2, X3)`` of the classical 2x2 game.

    Alice receives X0 at (C,C), X1 at (D,C), X2 at (C,D) and X3 at (D,D);
    Bob's payoffs are the same with 1 and 2 swapped (``Xtilde``).
    """

    X: tuple = ELW_PAYOFFS

    def __post_init__(self):
        X = tuple(float(x) for x in self.X)
        if len(X) != 4 or not all(np.isfinite(X)):
            raise ValueError(f"need four finite payoffs, got {self.X!r}")
        object.__setattr__(self, "X", X)

    @property
    def vector(self):
        return np.array(self.X)

    @property
    def tilde(self):
        X0, X1, X2, X3 = self.X
        return np.array([X0, X2, X1, X3])

    @property
    def spread(self):
        return max(self.X) - min(self.X)


def as_payoffs(X):
    if isinstance(X, ClassicalPayoffs):
        return X
    return ClassicalPayoffs(tuple(X))


def genericity_check(X):
    """Return ``(generic, violations)``.

    Generic means all four outcomes are distinct and all six pairwise sums
    are distinct.
    """
    X = as_payoffs(X).X
    violations = []
    for a, b in itertools.combinations(range(4), 2):
        if X[a] == X[b]:
            violations.append(f"X{a}=X{b}")
    pairs = list(itertools.combinations(range(4), 2))
    for (a, b), (c, d) in itertools.combinations(pairs, 2):
        if X[a] + X[b] == X[c] + X[d]:
            violations.append(f"X{a}+X{b}=X{c}+X{d}")
    return not violations, violations


def iterated_condition(X):
    """Informational: ``2 X0 > X1 + X2``."""
    X0, X1, X2, _ = as_payoffs(X).X
    return 2 * X0 > X1 + X2


def _check_gamma(gamma):
    gamma = float(gamma)
    if not 0.0 <= gamma <= np.pi / 2:
        raise ValueError(f"gamma must lie in [0, pi/2], got {gamma}")
    return gamma


def gate_matrix(gamma):
    """``J = exp(-i gamma/2 sigma_y (x) sigma_y)``; closed form since the generator squares to I."""
    gamma = _check_gamma(gamma)
    return np.cos(gamma / 2) * np.eye(4) - 1j * np.sin(gamma / 2) * _YY


def final_state(gamma, UA, UB):
    J = gate_matrix(gamma)
    UA, UB = check_su2(UA), check_su2(UB)
    psi0 = np.array([1, 0, 0, 0], dtype=complex)
    return J.conj().T @ np.kron(UA, UB) @ J @ psi0


def payoff_hilbert(gamma, UA, UB, X=ELW_PAYOFFS):
    """Expected payoffs ``($A, $B)`` from the final two-qubit state."""
    X0, X1, X2, X3 = as_payoffs(X).X
    prob = np.abs(final_state(gamma, UA, UB)) ** 2
    # basis order CC, CD, DC, DD
    pay_a = X0 * prob[0] + X2 * prob[1] + X1 * prob[2] + X3 * prob[3]
    pay_b = X0 * prob[0] + X1 * prob[1] + X2 * prob[2] + X3 * prob[3]
    return float(pay_a), float(pay_b)


def payoff_quaternion(p, q, X=ELW_PAYOFFS, raw=False):
    """Maximal-entanglement payoffs ``(sum X_a s_a^2, sum Xtilde_a s_a^2)``.

    ``s = pq`` in the relabelled convention used throughout the package;
    ``raw=True`` takes Bob's quaternion straight from his SU(2) matrix and uses
    ``s = p q^-1`` instead.
    """
    X = as_payoffs(X)
    q = inverse(q) if raw else np.asarray(q, dtype=float)
    s2 = mul(p, q) ** 2
    return float(X.vector @ s2), float(X.tilde @ s2)


def payoff_grid(P, Q, X=ELW_PAYOFFS):
    """Vectorized relabelled payoffs for broadcastable arrays of quaternions."""
    X = as_payoffs(X)
    s2 = mul(P, Q) ** 2
    return s2 @ X.vector, s2 @ X.tilde


def affine_payoff_transform(X, lam, mu):
    if lam <= 0:
        raise ValueError(f"scale must be positive, got {lam}")
    return ClassicalPayoffs(tuple(lam * x + mu for x in as_payoffs(X).X))


def stability_invariance_check(p, q, r, X=ELW_PAYOFFS, tol=1e-12):
    """Check ``$(p, q) == $(p r^-1, r q)`` for both players."""
    r = as_unit(r)
    before = payoff_quaternion(p, q, X)
    after = payoff_quaternion(mul(p, inverse(r)), mul(r, q), X)
    return bool(np.allclose(before, after, atol=tol, rtol=0.0))
