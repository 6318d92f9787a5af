import math

import numpy as np
import pytest
from hypothesis import given, seed
from hypothesis import strategies as st
from scipy.linalg import expm

from elwgame.engine import (
    ClassicalPayoffs, affine_payoff_transform, final_state, gate_matrix,
    genericity_check, iterated_condition, payoff_grid, payoff_hilbert,
    payoff_quaternion, stability_invariance_check,
)
from elwgame.quaternion import (
    BASIS, E0, E1, E3, SignedPermutation, alice_to_quaternion, bob_to_quaternion,
    inverse, mul, quaternion_to_alice, realize_signed_permutation,
)

from conftest import ELW, random_su2, random_unit, unit_quaternions

SIGMA_Y = np.array([[0, -1j], [1j, 0]])
# Alice's payoff per outcome, basis order CC, CD, DC, DD (Alice's move first)
ALICE_CELL = (0, 2, 1, 3)
BOB_CELL = (0, 1, 2, 3)


def hilbert_oracle(gamma, UA, UB, X):
    """Gate from the matrix exponential and payoffs from an explicit outcome table."""
    J = expm(-0.5j * gamma * np.kron(SIGMA_Y, SIGMA_Y))
    psi = J.conj().T @ np.kron(UA, UB) @ J @ np.array([1, 0, 0, 0])
    prob = np.abs(psi) ** 2
    return (sum(X[ALICE_CELL[k]] * prob[k] for k in range(4)),
            sum(X[BOB_CELL[k]] * prob[k] for k in range(4)))


def test_tilde_swaps_middle_components():
    P = ClassicalPayoffs(ELW)
    assert list(P.tilde) == [3.0, 0.0, 5.0, 1.0]
    assert P.spread == 5.0
    with pytest.raises(ValueError):
        ClassicalPayoffs((1.0, 2.0, 3.0))


def test_genericity_examples():
    assert genericity_check(ELW) == (True, [])
    ok, v = genericity_check((1, 1, 0, 2))
    assert not ok and "X0=X1" in v
    ok, v = genericity_check((0, 1, 2, 3))
    assert not ok and "X0+X3=X1+X2" in v
    assert iterated_condition(ELW)


def test_gate_examples():
    assert np.allclose(gate_matrix(0.0), np.eye(4))
    J = gate_matrix(math.pi / 2)
    assert np.allclose(J @ [1, 0, 0, 0], np.array([1, 0, 0, 1j]) / math.sqrt(2))
    for g in np.linspace(0, math.pi / 2, 7):
        Jg = gate_matrix(g)
        assert np.allclose(Jg @ Jg.conj().T, np.eye(4), atol=1e-14)
        assert np.allclose(Jg, expm(-0.5j * g * np.kron(SIGMA_Y, SIGMA_Y)), atol=1e-14)
    with pytest.raises(ValueError):
        gate_matrix(2.0)
    with pytest.raises(ValueError):
        gate_matrix(-0.1)


def test_final_state_examples(rng):
    I = np.eye(2)
    assert np.allclose(final_state(0.0, I, I), [1, 0, 0, 0])
    assert np.allclose(final_state(math.pi / 2, I, I), [1, 0, 0, 0])
    for _ in range(20):
        psi = final_state(math.pi / 2, random_su2(rng), random_su2(rng))
        assert np.linalg.norm(psi) == pytest.approx(1.0, abs=1e-12)


def test_classical_cells():
    I = np.eye(2)
    D = quaternion_to_alice(E1)
    assert payoff_hilbert(0.0, I, I, ELW) == pytest.approx((3, 3))
    assert payoff_hilbert(0.0, D, I, ELW) == pytest.approx((5, 0))
    assert payoff_hilbert(0.0, I, D, ELW) == pytest.approx((0, 5))
    assert payoff_hilbert(0.0, D, D, ELW) == pytest.approx((1, 1))


def test_hilbert_engine_matches_oracle(rng):
    X = np.array(ELW)
    for gamma in np.linspace(0, math.pi / 2, 5):
        for _ in range(40):
            UA, UB = random_su2(rng), random_su2(rng)
            assert payoff_hilbert(gamma, UA, UB, X) == pytest.approx(hilbert_oracle(gamma, UA, UB, X), abs=1e-12)


def test_quaternion_payoff_examples():
    assert payoff_quaternion(E1, E0, ELW) == (5.0, 0.0)
    assert payoff_quaternion(E1, E3, ELW)[1] == pytest.approx(5.0)
    assert payoff_quaternion(E1, E3, ELW, raw=True)[1] == pytest.approx(5.0)


def test_cross_engine_at_maximal_entanglement(rng):
    for _ in range(200):
        UA, UB = random_su2(rng), random_su2(rng)
        p, q_raw = alice_to_quaternion(UA), bob_to_quaternion(UB)
        h = payoff_hilbert(math.pi / 2, UA, UB, ELW)
        assert h == pytest.approx(payoff_quaternion(p, q_raw, ELW, raw=True), abs=1e-10)
        assert h == pytest.approx(payoff_quaternion(p, inverse(q_raw), ELW), abs=1e-10)


@seed(21)
@given(unit_quaternions(), unit_quaternions())
def test_payoff_bounds(p, q):
    a, b = payoff_quaternion(p, q, ELW)
    assert -1e-12 <= a <= 5 + 1e-12
    assert -1e-12 <= b <= 5 + 1e-12


@seed(22)
@given(unit_quaternions(), unit_quaternions(), unit_quaternions())
def test_stability_invariance(p, q, r):
    assert stability_invariance_check(p, q, r, ELW)
    assert stability_invariance_check(p, q, E0, ELW)
    assert payoff_quaternion(p, q, ELW) == pytest.approx(payoff_quaternion(mul(p, q), E0, ELW), abs=1e-12)
    assert payoff_quaternion(p, q, ELW) == pytest.approx(payoff_quaternion(E0, mul(p, q), ELW), abs=1e-12)


def test_affine_transform():
    assert affine_payoff_transform(ELW, 1, 0).X == ELW
    assert affine_payoff_transform(ELW, 2, 1).X == (7.0, 11.0, 1.0, 3.0)
    with pytest.raises(ValueError):
        affine_payoff_transform(ELW, 0, 1)
    with pytest.raises(ValueError):
        affine_payoff_transform(ELW, -1, 1)


@seed(23)
@given(unit_quaternions(), unit_quaternions(),
       st.floats(min_value=0.1, max_value=10), st.floats(min_value=-5, max_value=5))
def test_affine_transform_maps_payoffs(p, q, lam, mu):
    X2 = affine_payoff_transform(ELW, lam, mu)
    a, b = payoff_quaternion(p, q, ELW)
    a2, b2 = payoff_quaternion(p, q, X2)
    assert a2 == pytest.approx(lam * a + mu, abs=1e-9)
    assert b2 == pytest.approx(lam * b + mu, abs=1e-9)


def test_signed_permutation_symmetry(rng):
    sp = SignedPermutation((0, 2, 3, 1), (1, 1, 1, 1))
    p1, q1 = realize_signed_permutation(sp)
    Xp = sp.permute_payoffs(ELW)
    for _ in range(100):
        p, q = random_unit(rng), random_unit(rng)
        before = payoff_quaternion(p, q, ELW)[0]
        after = payoff_quaternion(mul(p1, p), mul(q, inverse(q1)), Xp)[0]
        assert after == pytest.approx(before, abs=1e-12)


def test_payoff_grid_matches_pointwise(rng):
    P, Q = random_unit(rng, 6), random_unit(rng, 5)
    A, B = payoff_grid(P[:, None], Q[None], ELW)
    for i in range(6):
        for j in range(5):
            assert (A[i, j], B[i, j]) == pytest.approx(payoff_quaternion(P[i], Q[j], ELW))
