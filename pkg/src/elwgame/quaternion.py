"""Quaternion algebra on flat real 4-vectors ``(p0, p1, p2, p3)``.

Quaternions are plain ``numpy`` arrays of shape ``(4,)``; every function here
is pure and returns a new array.  Unit quaternions double as strategies of the
maximally entangled game, and the SU(2) maps below fix how a player's 2x2
unitary is read off as a quaternion.
"""

import itertools
from dataclasses import dataclass

import numpy as np

UNIT_TOL = 1e-12

E0, E1, E2, E3 = (np.eye(4)[k] for k in range(4))
BASIS = np.eye(4)
_CONJ = np.array([1.0, -1.0, -1.0, -1.0])


def quat(*components):
    """Build a quaternion from four numbers or a single 4-sequence."""
    if len(components) == 1:
        components = components[0]
    p = np.asarray(components, dtype=float)
    if p.shape != (4,):
        raise ValueError(f"quaternion needs 4 components, got shape {p.shape}")
    return p


def as_unit(p, renormalize=False, tol=UNIT_TOL):
    """Return ``p`` as a validated unit quaternion.

    With ``renormalize=True`` any nonzero input is scaled onto the sphere
    instead of being rejected.
    """
    p = quat(p)
    n = np.sqrt(p @ p)
    if renormalize:
        if n == 0.0:
            raise ValueError("cannot renormalize the zero quaternion")
        return p / n
    if abs(n - 1.0) > tol:
        raise ValueError(f"not a unit quaternion: |p| = {n!r}")
    return p


def mul(p, q):
    """Hamilton product ``pq`` (e_i e_j = eps_ijk e_k, e_i^2 = -1)."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    out = np.empty(np.broadcast_shapes(p.shape, q.shape))
    out[..., 0] = p[..., 0] * q[..., 0] - np.sum(p[..., 1:] * q[..., 1:], axis=-1)
    out[..., 1:] = (p[..., :1] * q[..., 1:] + q[..., :1] * p[..., 1:]
                    + np.cross(p[..., 1:], q[..., 1:]))
    return out


def conj(p):
    return np.asarray(p, dtype=float) * _CONJ


def norm(p):
    p = np.asarray(p, dtype=float)
    return float(np.sqrt(p @ p))


def inverse(p):
    p = quat(p)
    n2 = p @ p
    if n2 == 0.0:
        raise ZeroDivisionError("the zero quaternion has no inverse")
    return conj(p) / n2


def _components(p):
    p = np.asarray(p, dtype=float)
    if p.shape[-1:] != (4,):
        raise ValueError(f"quaternion needs 4 components, got shape {p.shape}")
    return np.moveaxis(p, -1, 0)


def _rows(*rows):
    return np.stack([np.stack(r, axis=-1) for r in rows], axis=-2)


def left_mul_matrix(p):
    """Matrix ``m(p)`` with ``m(p) @ q == mul(p, q)``; stacks over leading axes."""
    p0, p1, p2, p3 = _components(p)
    return _rows(
        (p0, -p1, -p2, -p3),
        (p1, p0, -p3, p2),
        (p2, p3, p0, -p1),
        (p3, -p2, p1, p0),
    )


def right_mul_matrix(q):
    """Matrix ``m~(q)`` with ``m~(q) @ p == mul(p, q)``; stacks over leading axes."""
    q0, q1, q2, q3 = _components(q)
    return _rows(
        (q0, -q1, -q2, -q3),
        (q1, q0, q3, -q2),
        (q2, -q3, q0, q1),
        (q3, q2, -q1, q0),
    )


def rotate(r_left, v, r_right):
    """SO(4) action ``r_left * v * r_right^-1``."""
    return mul(mul(as_unit(r_left), v), inverse(as_unit(r_right)))


# SU(2) <-> unit quaternion.  A strategy matrix is (a, b; -conj(b), conj(a)).
# With the two-qubit game ordered as Alice (x) Bob, these are the maps for which
# the Hilbert-space payoffs equal sum_a X_a (p q^-1)_a^2.

def check_su2(U, tol=UNIT_TOL):
    U = np.asarray(U, dtype=complex)
    if U.shape != (2, 2):
        raise ValueError(f"SU(2) matrix must be 2x2, got {U.shape}")
    if not np.allclose(U @ U.conj().T, np.eye(2), atol=tol, rtol=0.0):
        raise ValueError("matrix is not unitary")
    if abs(np.linalg.det(U) - 1.0) > tol:
        raise ValueError("matrix does not have unit determinant")
    if abs(U[1, 0] + np.conj(U[0, 1])) > tol or abs(U[1, 1] - np.conj(U[0, 0])) > tol:
        raise ValueError("matrix is not of the form (a, b; -b*, a*)")
    return U


def su2(a, b):
    """The SU(2) matrix with first row ``(a, b)``."""
    return np.array([[a, b], [-np.conj(b), np.conj(a)]], dtype=complex)


def alice_to_quaternion(U):
    U = check_su2(U)
    a, b = U[0, 0], U[0, 1]
    return np.array([a.real, b.real, b.imag, a.imag])


def quaternion_to_alice(p):
    p0, p1, p2, p3 = as_unit(p)
    return su2(complex(p0, p3), complex(p1, p2))


def bob_to_quaternion(U):
    U = check_su2(U)
    a, b = U[0, 0], U[0, 1]
    return np.array([a.real, -b.imag, -b.real, -a.imag])


def quaternion_to_bob(q):
    q0, q1, q2, q3 = as_unit(q)
    return su2(complex(q0, -q3), complex(-q2, -q1))


@dataclass(frozen=True)
class SignedPermutation:
    """Basis relabelling ``e_a -> signs[a] * e_{sigma^-1(a)}``.

    ``sigma[a]`` is the image of ``a`` under the permutation of {0, 1, 2, 3}.
    """

    sigma: tuple
    signs: tuple = (1, 1, 1, 1)

    def __post_init__(self):
        if sorted(self.sigma) != [0, 1, 2, 3]:
            raise ValueError(f"not a permutation of 0..3: {self.sigma}")
        if any(s not in (1, -1) for s in self.signs) or len(self.signs) != 4:
            raise ValueError(f"signs must be four values in {{+1, -1}}: {self.signs}")

    @property
    def inverse_sigma(self):
        inv = [0] * 4
        for a, s in enumerate(self.sigma):
            inv[s] = a
        return tuple(inv)

    def matrix(self):
        """Matrix whose column ``a`` is the image of ``e_a``."""
        M = np.zeros((4, 4))
        inv = self.inverse_sigma
        for a in range(4):
            M[inv[a], a] = self.signs[a]
        return M

    def permute_payoffs(self, X):
        """Payoff vector ``X'`` with ``X'_{sigma^-1(a)} = X_a``.

        Then ``sum X'_b (M v)_b^2 == sum X_a v_a^2`` for ``M = self.matrix()``.
        """
        X = np.asarray(X, dtype=float)
        return X[list(self.sigma)]


def binary_octahedral():
    """The 48 unit quaternions {+-e_a, (+-e_a +- e_b)/sqrt2, (+-1 +-1 +-1 +-1)/2}."""
    out = []
    for a in range(4):
        for s in (1.0, -1.0):
            out.append(s * BASIS[a])
    for a, b in itertools.combinations(range(4), 2):
        for s, t in itertools.product((1.0, -1.0), repeat=2):
            out.append((s * BASIS[a] + t * BASIS[b]) / np.sqrt(2.0))
    for signs in itertools.product((1.0, -1.0), repeat=4):
        out.append(np.array(signs) / 2.0)
    return np.array(out)


def realize_signed_permutation(sp):
    """Find unit ``(p1, q1)`` with ``p1 e_a q1^-1 = signs[a] e_{sigma^-1(a)}``.

    Exhaustive search over pairs of binary-octahedral quaternions.  Returns
    ``None`` when the sign pattern is not realizable (the target matrix has
    determinant -1, which no two-sided multiplication can produce).
    """
    target = sp.matrix()
    if np.linalg.det(target) < 0:
        return None
    cands = binary_octahedral()
    lefts = np.array([left_mul_matrix(p) for p in cands])
    rights = np.array([right_mul_matrix(inverse(q)) for q in cands])
    products = np.einsum("iab,jbc->ijac", lefts, rights)
    err = np.abs(products - target).max(axis=(2, 3))
    hits = np.argwhere(err < 1e-12)
    if len(hits) == 0:
        return None
    i, j = hits[0]
    return cands[i], cands[j]


_EXCHANGE_ROTOR = (E0 + E3) / np.sqrt(2.0)


def player_exchange(p, q):
    """Map ``(p, q)`` to the pair on which Alice's payoff equals Bob's at ``(p, q)``."""
    r = _EXCHANGE_ROTOR
    return rotate(r, conj(q), r), rotate(r, conj(p), r)
