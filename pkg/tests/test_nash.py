import math

import numpy as np
import pytest
from hypothesis import given, seed
from hypothesis import strategies as st

from elwgame.engine import affine_payoff_transform, payoff_hilbert
from elwgame.grid import fibonacci_s2
from elwgame.measures import MixedStrategy, mixed_payoff, point_mass, uniform
from elwgame.nash import (
    best_response_matrix_A, best_response_matrix_B, equilibrium_family,
    exchange_strategies, exchange_su2_parameters, family_to_su2,
    maximal_eigenspace, strategy_to_su2, su2_family, su2_to_strategies,
    verify_nash,
)
from elwgame.quaternion import (
    BASIS, E0, E1, E2, E3, bob_to_quaternion, check_su2, inverse, right_mul_matrix,
)

from conftest import ELW, imaginary_units, random_unit, unit_quaternions


def explicit_Y(q, rho, X):
    """Entry-by-entry form of Y for Bob on {e0 with rho, q with 1 - rho}, q pure imaginary."""
    X0, X1, X2, X3 = X
    _, q1, q2, q3 = q
    r = 1 - rho
    d = [rho * X0 + r * (X1 * q1**2 + X2 * q2**2 + X3 * q3**2),
         rho * X1 + r * (X0 * q1**2 + X2 * q3**2 + X3 * q2**2),
         rho * X2 + r * (X0 * q2**2 + X1 * q3**2 + X3 * q1**2),
         rho * X3 + r * (X0 * q3**2 + X1 * q2**2 + X2 * q1**2)]
    Y = np.diag(d)
    Y[0, 1] = Y[1, 0] = r * (X3 - X2) * q2 * q3
    Y[0, 2] = Y[2, 0] = r * (X1 - X3) * q1 * q3
    Y[0, 3] = Y[3, 0] = r * (X2 - X1) * q1 * q2
    Y[1, 2] = Y[2, 1] = r * (X0 - X3) * q1 * q2
    Y[1, 3] = Y[3, 1] = r * (X0 - X2) * q1 * q3
    Y[2, 3] = Y[3, 2] = r * (X0 - X1) * q2 * q3
    return Y


def explicit_Z(theta, sigma, X):
    """Entry-by-entry form of Z for Alice on the theta-rotated pair in span(e1, e2)."""
    Xt = (X[0], X[2], X[1], X[3])
    c, s = math.cos(theta), math.sin(theta)
    a = s**2 + sigma * (c**2 - s**2)
    b = c**2 - sigma * (c**2 - s**2)
    Z = np.diag([Xt[1] * a + Xt[2] * b, Xt[0] * a + Xt[3] * b,
                 Xt[0] * b + Xt[3] * a, Xt[1] * b + Xt[2] * a])
    off = (2 * sigma - 1) * c * s
    Z[0, 3] = Z[3, 0] = off * (Xt[1] - Xt[2])
    Z[1, 2] = Z[2, 1] = off * (Xt[0] - Xt[3])
    return Z


def rotated_pair(theta, sigma):
    c, s = math.cos(theta), math.sin(theta)
    return MixedStrategy([sigma, 1 - sigma], [c * E1 + s * E2, -s * E1 + c * E2])


def test_matrix_A_examples():
    assert np.allclose(best_response_matrix_A(point_mass(E0), ELW).matrix, np.diag(ELW))
    Y = best_response_matrix_A(MixedStrategy([0.5, 0.5], [E0, E3]), ELW)
    assert np.allclose(Y.matrix, np.diag([2, 2.5, 2.5, 2]))
    assert Y.side == "A"
    rng = np.random.default_rng(3)
    Q, _ = np.linalg.qr(rng.normal(size=(4, 4)))
    assert np.allclose(best_response_matrix_A(uniform(Q.T), ELW).matrix, 2.25 * np.eye(4))


def test_matrix_B_examples():
    assert np.allclose(best_response_matrix_B(point_mass(E0), ELW).matrix, np.diag([3, 0, 5, 1]))
    Z = best_response_matrix_B(MixedStrategy([0.5, 0.5], [E1, E2]), ELW)
    assert np.allclose(Z.matrix, np.diag([2.5, 2, 2, 2.5]))
    Z = best_response_matrix_B(rotated_pair(0.7, 0.5), ELW).matrix
    assert np.allclose(Z - np.diag(np.diag(Z)), 0, atol=1e-15)


@seed(51)
@given(imaginary_units(), st.floats(min_value=0.0, max_value=1.0))
def test_matrix_A_matches_explicit_entries(q, rho):
    Y = best_response_matrix_A(MixedStrategy([rho, 1 - rho], [E0, q]), ELW).matrix
    assert np.allclose(Y, explicit_Y(q, rho, ELW), atol=1e-13)


@seed(52)
@given(st.floats(min_value=-4, max_value=4), st.floats(min_value=0, max_value=1))
def test_matrix_B_matches_explicit_entries(theta, sigma):
    Z = best_response_matrix_B(rotated_pair(theta, sigma), ELW).matrix
    assert np.allclose(Z, explicit_Z(theta, sigma, ELW), atol=1e-13)


@seed(53)
@given(st.lists(unit_quaternions(), min_size=1, max_size=5))
def test_matrices_are_symmetric_with_bounded_spectrum(points):
    nu = uniform(np.array(points))
    for M in (best_response_matrix_A(nu, ELW), best_response_matrix_B(nu, ELW)):
        assert np.allclose(M.matrix, M.matrix.T, atol=1e-10)
        w = np.linalg.eigvalsh(M.matrix)
        assert w.min() >= -1e-12 and w.max() <= 5 + 1e-12


def test_quadratic_form_is_the_payoff(rng):
    for _ in range(20):
        mu = MixedStrategy(rng.dirichlet(np.ones(3)), random_unit(rng, 3))
        nu = MixedStrategy(rng.dirichlet(np.ones(4)), random_unit(rng, 4))
        p, q = random_unit(rng), random_unit(rng)
        assert best_response_matrix_A(nu, ELW).payoff(p) == pytest.approx(
            mixed_payoff(point_mass(p), nu, ELW)[0], abs=1e-12)
        assert best_response_matrix_B(mu, ELW).payoff(q) == pytest.approx(
            mixed_payoff(mu, point_mass(q), ELW)[1], abs=1e-12)


def test_maximal_eigenspace_examples():
    e = maximal_eigenspace(np.diag([2, 2.5, 2.5, 2]))
    assert e.top_value == pytest.approx(2.5) and e.multiplicity == 2
    assert np.allclose(e.top_basis @ e.top_basis.T, np.diag([0, 1, 1, 0]))
    assert e.multiplicities == (2, 2) and e.top_gap == pytest.approx(0.5)
    e = maximal_eigenspace(2.25 * np.eye(4))
    assert e.multiplicity == 4 and math.isinf(e.top_gap)
    e = maximal_eigenspace(np.diag(ELW))
    assert e.multiplicity == 1 and np.allclose(np.abs(e.top_basis[:, 0]), E1)
    assert sum(e.multiplicities) == 4


def test_cluster_tolerance_is_relative_to_spread():
    e = maximal_eigenspace(np.diag([5.0, 5.0 - 1e-10, 0.0, 0.0]))
    assert e.multiplicity == 2
    e = maximal_eigenspace(np.diag([5.0, 5.0 - 1e-6, 0.0, 0.0]))
    assert e.multiplicity == 1
    e = maximal_eigenspace(np.diag([5.0, 5.0 - 1e-6, 0.0, 0.0]), cluster_tol=1e-6)
    assert e.multiplicity == 2


def test_verify_examples():
    r = verify_nash(MixedStrategy([0.5, 0.5], [E1, E2]), MixedStrategy([0.5, 0.5], [E0, E3]), ELW)
    assert r.verdict and r.type == (2, 2)
    assert r.payoffs == pytest.approx((2.5, 2.5), abs=1e-12)
    r = verify_nash(point_mass(E1), point_mass(E0), ELW)
    assert not r.verdict
    assert r.residuals[0] < 1e-12 and r.residuals[1] == pytest.approx(1.0)
    r = verify_nash(uniform(BASIS), uniform(BASIS), ELW)
    assert r.verdict and r.type == (4, 4)
    assert r.payoffs == pytest.approx((2.25, 2.25))
    assert r.to_json()["top_gap"] is None


def test_verify_reports_sorted_type():
    r = verify_nash(point_mass(E1), MixedStrategy([0.5, 0.5], [E0, E3]), ELW)
    assert r.type == (2, 1) and r.support_sizes == (1, 2)
    assert set(r.to_json()) == {"verdict", "type", "payoffs", "residuals", "top_gap"}
    with pytest.raises(TypeError):
        verify_nash([E0], point_mass(E0), ELW)


def test_family_examples():
    mu, nu = equilibrium_family(0.0, E0, 1)
    assert np.allclose(mu.points, [E1, E2]) and np.allclose(nu.points, [E0, E3])
    with pytest.raises(ValueError):
        equilibrium_family(0.0, E0, 0)


def test_family_verifies_and_pays_two_and_a_half(rng):
    for _ in range(100):
        theta = rng.uniform(0, 2 * math.pi)
        mu, nu = equilibrium_family(theta, random_unit(rng), int(rng.choice([1, -1])))
        r = verify_nash(mu, nu, ELW)
        assert r.verdict and max(r.residuals) < 1e-10
        assert mixed_payoff(mu, nu, ELW) == pytest.approx((2.5, 2.5), abs=1e-10)


def test_family_su2_roundtrip(rng):
    for _ in range(20):
        theta, r = rng.uniform(0, 6), random_unit(rng)
        mats = family_to_su2(theta, r, -1)
        for U in mats:
            check_su2(U)
        _, nu = equilibrium_family(theta, r, -1)
        for U, q in zip(mats[2:], nu.points):
            assert np.allclose(inverse(bob_to_quaternion(U)), q)


def test_family_is_a_hilbert_space_equilibrium(rng):
    # expected payoffs from the two-qubit engine, averaged over the mixed strategies
    theta, r = 0.4, random_unit(rng)
    UA1, UA2, UB1, UB2 = family_to_su2(theta, r, 1)
    avg = np.mean([payoff_hilbert(math.pi / 2, a, b, ELW) for a in (UA1, UA2) for b in (UB1, UB2)], axis=0)
    assert avg == pytest.approx((2.5, 2.5), abs=1e-12)


def test_printed_su2_family_matches_quaternion_family(rng):
    for _ in range(20):
        v = random_unit(rng)
        alpha, beta, theta = complex(v[0], v[1]), complex(v[2], v[3]), rng.uniform(0, 2 * math.pi)
        printed = su2_family(alpha, beta, theta)
        r = bob_to_quaternion(printed[2])
        derived = family_to_su2(-math.pi / 2 - theta, r, -1)
        for U, V in zip(printed, derived):
            assert np.allclose(U, V, atol=1e-12)
        assert verify_nash(*su2_to_strategies(printed[:2], printed[2:]), ELW).verdict


def test_printed_family_at_classical_point():
    UA1, UA2, UB1, UB2 = su2_family(0, 1, math.pi)
    assert np.allclose(UA1, np.eye(2))
    assert np.allclose(UA2, np.diag([-1j, 1j]))
    assert np.allclose(UB1, [[0, 1], [-1, 0]])
    assert np.allclose(UB2, [[0, -1j], [-1j, 0]])
    r = verify_nash(*su2_to_strategies([UA1, UA2], [UB1, UB2]), ELW)
    assert r.verdict and r.payoffs == pytest.approx((2.5, 2.5))
    with pytest.raises(ValueError):
        su2_family(1, 1, 0.0)


def test_su2_parameter_exchange_swaps_players():
    alpha, beta, theta = 0.6, 0.8j, 0.3
    A1, A2, B1, B2 = su2_family(alpha, beta, theta)
    C1, C2, D1, D2 = su2_family(*exchange_su2_parameters(alpha, beta, theta))

    def same_up_to_sign(U, options):
        return any(np.allclose(U, s * V) for V in options for s in (1, -1))

    assert all(same_up_to_sign(U, (B1, B2)) for U in (C1, C2))
    assert all(same_up_to_sign(U, (A1, A2)) for U in (D1, D2))


def test_commutation_and_double_degeneracy_at_half():
    for q in fibonacci_s2(500):
        nu = MixedStrategy([0.5, 0.5], [E0, q])
        Y = best_response_matrix_A(nu, ELW).matrix
        M = right_mul_matrix(q)
        assert np.linalg.norm(Y @ M - M @ Y) < 1e-10
        w = np.linalg.eigvalsh(Y)
        assert abs(w[0] - w[1]) < 1e-10 and abs(w[2] - w[3]) < 1e-10
        v = maximal_eigenspace(Y).top_basis[:, 0]
        u = M @ v
        assert abs(u @ v) < 1e-10
        assert np.linalg.norm(Y @ u - w[-1] * u) < 1e-10


def test_verdict_symmetric_under_player_exchange(rng):
    pairs = [equilibrium_family(rng.uniform(0, 6), random_unit(rng), 1) for _ in range(10)]
    pairs += [(MixedStrategy(rng.dirichlet(np.ones(2)), random_unit(rng, 2)),
               MixedStrategy(rng.dirichlet(np.ones(3)), random_unit(rng, 3))) for _ in range(10)]
    for mu, nu in pairs:
        r = verify_nash(mu, nu, ELW)
        r2 = verify_nash(*exchange_strategies(mu, nu), ELW)
        assert r.verdict == r2.verdict
        assert r2.payoffs == pytest.approx(r.payoffs[::-1], abs=1e-12)


def test_affine_transform_preserves_top_eigenspaces(rng):
    for _ in range(50):
        nu = MixedStrategy(rng.dirichlet(np.ones(3)), random_unit(rng, 3))
        X2 = affine_payoff_transform(ELW, rng.uniform(0.1, 10), rng.uniform(-5, 5))
        e1 = maximal_eigenspace(best_response_matrix_A(nu, ELW))
        e2 = maximal_eigenspace(best_response_matrix_A(nu, X2))
        P1 = e1.top_basis @ e1.top_basis.T
        P2 = e2.top_basis @ e2.top_basis.T
        assert np.allclose(P1, P2, atol=1e-8)


def test_strategy_to_su2_uses_inverse_for_bob():
    mu, nu = equilibrium_family(0.0)
    alice, bob = strategy_to_su2(mu, nu)
    assert np.allclose(alice[0], [[0, 1], [-1, 0]])
    assert np.allclose(bob[0], np.eye(2))
