from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from _strategies import nonzero_scalars, polys, scalars
from qhol.scalar import PoleError, QEvaluationPoint, Scalar, parse_scalar

q = Scalar.q()
x = Scalar.param("x")


def test_difference_of_squares():
    assert (1 - q) * (1 + q) == 1 - q**2


def test_self_division_is_one():
    a = (1 - q * x) / (3 + q**2)
    assert a / a == 1


def test_cyclotomic_quotient_reduces():
    # polynomial division oracle: (1 - q^3) = (1 - q)(1 + q + q^2)
    r = (1 - q**3) / (1 - q)
    assert r == 1 + q + q**2
    assert r.is_polynomial()


def test_division_by_zero_raises():
    with pytest.raises(ZeroDivisionError):
        q / Scalar.from_int(0)
    with pytest.raises(ZeroDivisionError):
        Scalar.from_int(0).inverse()


def test_eval_substitution():
    assert ((1 - q) / (1 + q)).evaluate(QEvaluationPoint.make(2)) == Fraction(-1, 3)


def test_eval_at_q_one_is_rejected():
    # q = 1 is never a valid specialization, so 1/(1-q) cannot be evaluated there
    with pytest.raises(ValueError):
        (1 / (1 - q)).evaluate(QEvaluationPoint.make(1))


def test_eval_pole_names_factor():
    with pytest.raises(PoleError) as err:
        (1 / ((2 - q) * (3 + q))).evaluate(QEvaluationPoint.make(2))
    assert "q" in str(err.value)


def test_eval_reduces_before_substituting():
    assert ((1 - q**2) / (1 - q)).evaluate(QEvaluationPoint.make(3)) == 4


def test_eval_point_rejects_unit_values():
    for bad in (0, 1, -1):
        with pytest.raises(ValueError):
            QEvaluationPoint.make(bad)


def test_eval_pole_at_parameter_value():
    with pytest.raises(PoleError):
        (1 / (x - 2)).evaluate(QEvaluationPoint.make(3, x=2))


def test_rescale_examples():
    assert q.rescale_q(2) == q**2
    assert Scalar.from_int(1).rescale_q(-5) == 1
    assert ((1 - q) / (1 + q)).rescale_q(-1) == (q - 1) / (q + 1)
    with pytest.raises(ValueError):
        q.rescale_q(0)


def test_negative_powers_are_fractions():
    assert q**-3 == 1 / q**3
    assert not (q**-3).is_polynomial()


def test_parameter_promotion():
    s = q + x
    assert s.params == ("x",)
    assert s - x == q


def test_canonical_sign():
    assert str((-q) / (-2 * q)) == "1/2"
    assert (q - 1) / (1 - q) == -1


@pytest.mark.parametrize(
    "value",
    [(1 - q) / (1 + q), x / (q * x + 3 * q**2), -q / (2 * q), q**-3, x * q / (q - x), Scalar.from_int(0)],
)
def test_text_round_trip(value):
    assert parse_scalar(str(value)) == value


def test_hash_agrees_with_equality():
    assert hash(x - x) == hash(Scalar.from_int(0))
    assert hash((q**2 - 1) / (q - 1)) == hash(q + 1)


# -- properties ---------------------------------------------------------------


@given(scalars(), scalars(), scalars())
def test_field_associativity_and_distributivity(a, b, c):
    assert (a + b) + c == a + (b + c)
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c


@given(nonzero_scalars())
def test_inverses(a):
    assert a * a.inverse() == 1
    assert a + (-a) == 0


@given(scalars(), scalars(), st.integers(2, 9).filter(lambda v: v != 7), st.integers(2, 9))
def test_evaluation_is_ring_homomorphism(a, b, qv, xv):
    pt = QEvaluationPoint.make(Fraction(qv, 7), x=Fraction(xv, 5))
    try:
        ea, eb = a.evaluate(pt), b.evaluate(pt)
    except PoleError:
        return
    assert (a * b).evaluate(pt) == ea * eb
    assert (a + b).evaluate(pt) == ea + eb


@given(scalars(), scalars(), st.integers(-3, 3).filter(bool))
def test_rescale_is_ring_homomorphism(a, b, c):
    assert (a * b).rescale_q(c) == a.rescale_q(c) * b.rescale_q(c)
    assert (a + b).rescale_q(c) == a.rescale_q(c) + b.rescale_q(c)
    assert a.rescale_q(1) == a


@given(scalars())
def test_print_parse_round_trip(a):
    assert parse_scalar(str(a)) == a


@given(polys())
def test_polynomials_have_unit_denominator(p):
    assert p.is_polynomial()
