"""Quaternionic analysis of the Eisert-Wilkens-Lewenstein quantum game.

At maximal entanglement a strategy pair is a pair of unit quaternions and the
payoffs depend only on their product.  The package provides the algebra, both
payoff engines, mixed strategies, Nash verification, and a case-by-case
equilibrium classifier.
"""

from .classifier import (
    CaseResult, NonGenericPayoffs, OracleConfig, classify_all, classify_M34,
    classify_N1, classify_N2_axis, classify_N2_caseA, classify_N2_caseB,
    classify_N3plus, epsilon_nash_oracle,
)
from .engine import (
    ELW_PAYOFFS, ClassicalPayoffs, affine_payoff_transform, final_state,
    gate_matrix, genericity_check, payoff_hilbert, payoff_quaternion,
    stability_invariance_check,
)
from .linalg import symmetric_eigensolve
from .measures import (
    CanonicalStrategy, MixedStrategy, canonicalize, equivalence_check,
    mixed_payoff, point_mass, second_moment, uniform,
)
from .nash import (
    best_response_matrix_A, best_response_matrix_B, equilibrium_family,
    family_to_su2, maximal_eigenspace, su2_family, verify_nash,
)
from .quaternion import (
    E0, E1, E2, E3, SignedPermutation, alice_to_quaternion, bob_to_quaternion,
    conj, inverse, left_mul_matrix, mul, norm, player_exchange,
    quaternion_to_alice, quaternion_to_bob, realize_signed_permutation,
    right_mul_matrix, rotate,
)
