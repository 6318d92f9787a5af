"""Best-response matrices, maximal eigenspaces and Nash verification.

Against a fixed opponent, a player's payoff is a quadratic form in their own
unit quaternion.  The best responses are exactly the unit vectors of the top
eigenspace of that form, so a pair of mixed strategies is an equilibrium iff
every support point of each player lies in the top eigenspace of the matrix
induced by the other.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .engine import ELW_PAYOFFS, as_payoffs
from .linalg import symmetric_eigensolve
from .measures import MixedStrategy, canonicalize, mixed_payoff
from .quaternion import (
    E0, E1, E2, E3, alice_to_quaternion, as_unit, bob_to_quaternion, inverse,
    left_mul_matrix, mul, player_exchange, quaternion_to_alice,
    quaternion_to_bob, right_mul_matrix, su2,
)

VERIFY_TOL = 1e-9
CLUSTER_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class BestResponseMatrix:
    """Quadratic form of one player's payoff; ``side`` is "A" (Alice) or "B" (Bob)."""

    matrix: np.ndarray
    side: str

    def payoff(self, x):
        x = np.asarray(x, dtype=float)
        return float(x @ self.matrix @ x)


def best_response_matrix_A(nu, X=ELW_PAYOFFS):
    """``Y = sum_b rho_b m~(q_b)^T diag(X) m~(q_b)``, so that ``$A(p, nu) = p^T Y p``."""
    D = np.diag(as_payoffs(X).vector)
    Y = sum(w * right_mul_matrix(q).T @ D @ right_mul_matrix(q) for w, q in nu.atoms())
    return BestResponseMatrix((Y + Y.T) / 2, "A")


def best_response_matrix_B(mu, X=ELW_PAYOFFS):
    """``Z = sum_a sigma_a m(p_a)^T diag(Xtilde) m(p_a)``, so that ``$B(mu, q) = q^T Z q``."""
    D = np.diag(as_payoffs(X).tilde)
    Z = sum(w * left_mul_matrix(p).T @ D @ left_mul_matrix(p) for w, p in mu.atoms())
    return BestResponseMatrix((Z + Z.T) / 2, "B")


@dataclass(frozen=True, eq=False)
class EigenspaceReport:
    eigenvalues: np.ndarray       # raw, descending
    values: tuple                 # one representative per cluster, descending
    multiplicities: tuple
    top_basis: np.ndarray         # columns span the top cluster
    threshold: float
    top_gap: float                # top cluster value minus the next one (inf if none)

    @property
    def top_value(self):
        return self.values[0]

    @property
    def multiplicity(self):
        return self.multiplicities[0]

    def residual(self, x):
        """Distance of ``x`` from the top eigenspace, ``|(I - P_top) x|``."""
        x = np.asarray(x, dtype=float)
        B = self.top_basis
        return float(np.linalg.norm(x - B @ (B.T @ x)))


def maximal_eigenspace(M, cluster_tol=CLUSTER_TOL):
    """Cluster the spectrum greedily and return the top eigenspace.

    An eigenvalue joins the current cluster while it lies within
    ``cluster_tol * max(1, spread)`` of the cluster's largest value.
    """
    A = M.matrix if isinstance(M, BestResponseMatrix) else np.asarray(M, dtype=float)
    w, V = symmetric_eigensolve(A)
    threshold = cluster_tol * max(1.0, float(w[0] - w[-1]))
    clusters = [[0]]
    for k in range(1, len(w)):
        if w[clusters[-1][0]] - w[k] <= threshold:
            clusters[-1].append(k)
        else:
            clusters.append([k])
    values = tuple(float(np.mean(w[c])) for c in clusters)
    top = clusters[0]
    basis, _ = np.linalg.qr(V[:, top])
    gap = values[0] - values[1] if len(values) > 1 else math.inf
    return EigenspaceReport(w, values, tuple(len(c) for c in clusters), basis, threshold, gap)


@dataclass(frozen=True, eq=False)
class NashReport:
    verdict: bool
    type: tuple                   # (M, N) ordered M >= N
    support_sizes: tuple          # (|Lambda|, |Sigma|) before ordering
    residuals: tuple
    payoffs: tuple
    top_gaps: tuple
    top_multiplicities: tuple
    alice: MixedStrategy          # canonical forms
    bob: MixedStrategy
    tol: float
    cluster_tol: float
    Lambda: tuple = field(default=())
    Sigma: tuple = field(default=())

    @property
    def top_gap(self):
        return min(self.top_gaps)

    def to_json(self, full=False):
        gap = self.top_gap
        out = {
            "verdict": bool(self.verdict),
            "type": list(self.type),
            "payoffs": [float(x) for x in self.payoffs],
            "residuals": [float(x) for x in self.residuals],
            "top_gap": None if math.isinf(gap) else float(gap),
        }
        if full:
            out.update({
                "support_sizes": list(self.support_sizes),
                "top_multiplicities": list(self.top_multiplicities),
                "top_gaps": [None if math.isinf(g) else float(g) for g in self.top_gaps],
                "tol": self.tol,
                "cluster_tol": self.cluster_tol,
                "alice": self.alice.to_json(),
                "bob": self.bob.to_json(),
            })
        return out


def verify_nash(mu, nu, X=ELW_PAYOFFS, tol=VERIFY_TOL, cluster_tol=CLUSTER_TOL):
    """Check the maximal-eigenspace criterion for Alice playing ``mu`` and Bob ``nu``."""
    if not isinstance(mu, MixedStrategy) or not isinstance(nu, MixedStrategy):
        raise TypeError("verify_nash expects MixedStrategy arguments")
    X = as_payoffs(X)
    mu_c, nu_c = canonicalize(mu), canonicalize(nu)
    eig_a = maximal_eigenspace(best_response_matrix_A(nu_c, X), cluster_tol)
    eig_b = maximal_eigenspace(best_response_matrix_B(mu_c, X), cluster_tol)
    res_a = max(eig_a.residual(p) for p in mu_c.points)
    res_b = max(eig_b.residual(q) for q in nu_c.points)
    sizes = (len(mu_c), len(nu_c))
    return NashReport(
        verdict=bool(res_a < tol and res_b < tol),
        type=tuple(sorted(sizes, reverse=True)),
        support_sizes=sizes,
        residuals=(res_a, res_b),
        payoffs=mixed_payoff(mu_c, nu_c, X),
        top_gaps=(eig_a.top_gap, eig_b.top_gap),
        top_multiplicities=(eig_a.multiplicity, eig_b.multiplicity),
        alice=mu_c,
        bob=nu_c,
        tol=tol,
        cluster_tol=cluster_tol,
        Lambda=tuple(range(sizes[0])),
        Sigma=tuple(range(sizes[1])),
    )


def exchange_strategies(mu, nu):
    """Swap the players' roles: Alice's payoff at the result equals Bob's at ``(mu, nu)``."""
    new_alice = [player_exchange(E0, q)[0] for q in nu.points]
    new_bob = [player_exchange(p, E0)[1] for p in mu.points]
    return MixedStrategy(nu.weights, new_alice), MixedStrategy(mu.weights, new_bob)


def family_member(alice_plane, bob_pair, theta=0.0, r=E0, sign=1):
    """Rotate an equilibrium by ``theta`` inside Alice's plane and shift it by ``r``.

    Alice plays ``(a1 cos + a2 sin) r`` and ``sign (-a1 sin + a2 cos) r``,
    Bob plays ``r^-1 b1`` and ``sign r^-1 b2``, all with probability 1/2.
    """
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    r = as_unit(r)
    a1, a2 = (np.asarray(a, dtype=float) for a in alice_plane)
    b1, b2 = (np.asarray(b, dtype=float) for b in bob_pair)
    c, s = math.cos(theta), math.sin(theta)
    r_inv = inverse(r)
    alice = [mul(c * a1 + s * a2, r), sign * mul(-s * a1 + c * a2, r)]
    bob = [mul(r_inv, b1), sign * mul(r_inv, b2)]
    return MixedStrategy([0.5, 0.5], alice), MixedStrategy([0.5, 0.5], bob)


def equilibrium_family(theta=0.0, r=E0, sign=1):
    """The equilibria of the original game: Alice on span(e1, e2), Bob on {e0, e3}, shifted by ``r``."""
    return family_member((E1, E2), (E0, E3), theta, r, sign)


def strategy_to_su2(mu, nu):
    """SU(2) matrices for the atoms of both players (Bob's relabelled back via ``q -> q^-1``)."""
    alice = [quaternion_to_alice(p) for p in mu.points]
    bob = [quaternion_to_bob(inverse(q)) for q in nu.points]
    return alice, bob


def family_to_su2(theta=0.0, r=E0, sign=1):
    """``(UA1, UA2, UB1, UB2)`` for the family member at ``(theta, r, sign)``."""
    alice, bob = strategy_to_su2(*equilibrium_family(theta, r, sign))
    return alice[0], alice[1], bob[0], bob[1]


def su2_family(alpha, beta, theta):
    """Closed-form SU(2) equilibrium strategies parameterized by Bob's first matrix ``(alpha, beta)``."""
    alpha, beta = complex(alpha), complex(beta)
    if abs(abs(alpha) ** 2 + abs(beta) ** 2 - 1.0) > 1e-12:
        raise ValueError("need |alpha|^2 + |beta|^2 = 1")
    ph = np.exp(-1j * theta)
    UA1 = su2(-beta * ph, -1j * alpha * ph)
    UA2 = su2(1j * beta * ph, -alpha * ph)
    UB1 = su2(alpha, beta)
    UB2 = su2(-1j * alpha, -1j * beta)
    return UA1, UA2, UB1, UB2


def exchange_su2_parameters(alpha, beta, theta):
    """Parameters ``(alpha', beta', theta')`` of the role-swapped member of ``su2_family``."""
    ph = np.exp(-1j * theta)
    return -beta * ph, -1j * alpha * ph, math.pi - theta


def su2_to_strategies(UA, UB):
    """Uniform mixed strategies from lists of SU(2) matrices (Bob relabelled to ``q^-1``)."""
    alice = [alice_to_quaternion(U) for U in UA]
    bob = [inverse(bob_to_quaternion(U)) for U in UB]
    return (MixedStrategy(np.full(len(alice), 1 / len(alice)), alice),
            MixedStrategy(np.full(len(bob), 1 / len(bob)), bob))
