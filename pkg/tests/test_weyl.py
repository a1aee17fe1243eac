import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from _strategies import operators, random_symplectic
from qhol.catalog import builtin
from qhol.scalar import Scalar
from qhol.sequence import seq_apply_operator
from qhol.weyl import (
    SymplecticMatrix,
    WeylOperator,
    mellin_matrix,
    parse_operator,
    weyl_add,
    weyl_apply,
    weyl_mul,
    weyl_scale,
    weyl_symplectic,
    weyl_zero_extension_multiplier,
)

q = Scalar.q()
L = WeylOperator.L()
M = WeylOperator.M()
ONE = WeylOperator.one(1)


def test_commutation_rule():
    assert weyl_mul(L, M) == weyl_scale(weyl_mul(M, L), q)


def test_unit():
    P = parse_operator("(1-q*M)*L - (1-q*M)^2")
    assert weyl_mul(P, ONE) == P
    assert weyl_add(WeylOperator.zero(1), P) == P


def test_commutation_twice():
    assert L * L * M == q**2 * M * L**2


def test_cancellation():
    assert (L + M) + (-M) == L


def test_binomial_square():
    assert (M + L) ** 2 == M**2 + (1 + q) * M * L + L**2


def test_rank_mismatch():
    with pytest.raises(ValueError):
        weyl_mul(L, WeylOperator.L(0, 2))
    with pytest.raises(ValueError):
        weyl_add(L, WeylOperator.L(0, 2))


def test_apply_qpow():
    f = builtin("qpow")
    assert all(weyl_apply(L - q, f, (n,)).is_zero() for n in range(-5, 6))


def test_apply_identity():
    f = builtin("qpoch")
    assert weyl_apply(ONE, f, (3,)) == f(3)


def test_apply_qpow2_at_three():
    f = lambda n: Scalar.qpow(n[0] ** 2)
    assert weyl_apply(L - q * M**2, f, (3,)).is_zero()


def test_apply_negative_exponent():
    f = builtin("qpow")
    # M^-1 L^-1 applied to q^n at n = 2 gives q^-2 q^1
    assert weyl_apply(WeylOperator.monomial([-1], [-1]), f, (2,)) == q**-1


def test_symplectic_identity():
    P = parse_operator("(1-q*M)*L - (1-q*M)^2")
    assert weyl_symplectic(P, SymplecticMatrix.identity(1)) == P


def test_mellin_images():
    X = mellin_matrix(1)
    assert weyl_symplectic(M, X) == WeylOperator.monomial([0], [-1])
    assert weyl_symplectic(L, X) == M


def test_lower_triangular_block():
    X = SymplecticMatrix.from_full([[1, 0], [1, 1]])
    assert weyl_symplectic(M, X) == M * L


def test_non_symplectic_rejected():
    with pytest.raises(ValueError):
        SymplecticMatrix.from_full([[2, 0], [0, 1]])


def test_zero_extension_multiplier_qpoch():
    P = L - (1 - q * M)
    expected = (1 - q * M) * L - (1 - q * M) ** 2
    assert weyl_zero_extension_multiplier(P, 1) == expected
    f = builtin("qpoch")
    assert all(weyl_apply(expected, f, (n,)).is_zero() for n in range(-8, 9))


def test_zero_extension_multiplier_trivial_and_order_two():
    assert weyl_zero_extension_multiplier(ONE, 0) == ONE
    P = L**2 - 1
    assert weyl_zero_extension_multiplier(P, 2) == (1 - q * M) * (1 - q**2 * M) * P


@pytest.mark.parametrize(
    "text,names",
    [
        ("(1-q*M)*L - (1-q*M)^2", None),
        ("Mn*Lk - q^-2*x*Mk", ["n", "k"]),
        ("M1*L2 - 1/2*M2", None),
        ("L^-1 + q/(1+q)*M^-2", None),
    ],
)
def test_operator_text_round_trip(text, names):
    P = parse_operator(text, names=names)
    assert parse_operator(P.to_str(names), names=names, rank=P.rank) == P


def test_degree_and_plus():
    P = parse_operator("M1^2*L2 + L1 - 3", rank=2)
    assert P.is_plus()
    assert P.degree() == 3
    assert not parse_operator("M^-1*L").is_plus()


# -- properties ---------------------------------------------------------------


@given(operators(rank=2, plus=False), operators(rank=2, plus=False), operators(rank=2, plus=False))
def test_associative_and_distributive(P, Q, R):
    assert (P * Q) * R == P * (Q * R)
    assert P * (Q + R) == P * Q + P * R
    assert (P + Q) * R == P * R + Q * R


@given(operators(rank=2), operators(rank=2))
def test_grading_bound(P, Q):
    prod = P * Q
    if not prod.is_zero():
        assert prod.degree() <= P.degree() + Q.degree()


@given(operators(rank=1, plus=False), operators(rank=1, plus=False), st.integers(-4, 4))
def test_action_compatibility(P, Q, n):
    f = builtin("xqpoch")
    assert weyl_apply(P * Q, f, (n,)) == weyl_apply(P, seq_apply_operator(Q, f), (n,))


@given(operators(rank=2, plus=False))
def test_text_round_trip_property(P):
    assert parse_operator(P.to_str(), rank=2) == P


def relations_hold(X: SymplecticMatrix) -> bool:
    r = X.rank
    for i in range(r):
        for j in range(r):
            Li = weyl_symplectic(WeylOperator.L(i, r), X)
            Mj = weyl_symplectic(WeylOperator.M(j, r), X)
            if Li * Mj != (q if i == j else Scalar.from_int(1)) * (Mj * Li):
                return False
    return True


def test_relation_preservation_fixed():
    assert relations_hold(mellin_matrix(1))
    assert relations_hold(mellin_matrix(2))
    assert relations_hold(SymplecticMatrix.identity(2))
    assert relations_hold(SymplecticMatrix.from_full([[1, 0], [1, 1]]))


@given(st.integers(0, 10**6))
def test_relation_preservation_random(seed):
    assert relations_hold(random_symplectic(random.Random(seed), 2))


@given(st.integers(0, 10**6), st.lists(st.integers(-3, 3), min_size=4, max_size=4))
def test_composition_on_exponents(seed, e):
    rng = random.Random(seed)
    X, Y = random_symplectic(rng, 2), random_symplectic(rng, 2)
    a, b = tuple(e[:2]), tuple(e[2:])
    assert X.apply_exponents(*Y.apply_exponents(a, b)) == (X @ Y).apply_exponents(a, b)


def test_mellin_twice_negates_exponents():
    X = mellin_matrix(2)
    P = parse_operator("M1^2*L2 - q*M2*L1^-1 + 3", rank=2)
    twice = weyl_symplectic(weyl_symplectic(P, X), X)
    assert {k for k in twice.terms} == {(tuple(-a for a in al), tuple(-b for b in be)) for al, be in P.terms}
    assert (X @ X).apply_exponents((1, 2), (3, 4)) == ((-1, -2), (-3, -4))
