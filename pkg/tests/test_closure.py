import pytest

from qhol.catalog import builtin
from qhol.closure import (
    ClosureError,
    closed_affine,
    closed_mul,
    closed_sum,
    closure_affine,
    closure_mul,
    closure_sum,
)
from qhol.guess import GuessConfig, guess_annihilator
from qhol.scalar import Scalar
from qhol.sequence import constant, seq_add, seq_affine, seq_mul
from qhol.system import AnnihilatorSystem, VerificationError, box_points, verify_operator
from qhol.weyl import WeylOperator, parse_operator, weyl_apply

q = Scalar.q()
L = WeylOperator.L()


def vanishes(P, f, box):
    return all(weyl_apply(P, f, n).is_zero() for n in box_points(box))


def test_sum_qpow_alt():
    f, g = builtin("qpow"), builtin("alt")
    P = closure_sum(f.system, g.system, 0)
    assert P.l_degree(0) <= 2
    assert vanishes(P, seq_add(f, g), ((-6, 6),))


def test_sum_with_itself():
    f = builtin("qpoch")
    P = closure_sum(f.system, f.system, 0)
    assert P.l_degree(0) <= 2
    assert vanishes(P, seq_add(f, f), ((-6, 10),))
    assert vanishes(f.system.direction(0), seq_add(f, f), ((-6, 10),))


def test_sum_qpoch_delta():
    f, g = builtin("qpoch"), builtin("delta")
    h = closed_sum(f, g)
    assert h.system.status == "window-verified"
    assert vanishes(h.system.direction(0), seq_add(f, g), ((-6, 10),))


def test_mul_qpow_qpow_matches_guess():
    f = builtin("qpow")
    P = closure_mul(f.system, f.system, 0)
    assert P.l_degree(0) <= 1
    sq = seq_mul(f, f)
    assert vanishes(P, sq, ((-6, 10),))
    guessed = guess_annihilator(sq, GuessConfig(order=1, mdeg=0, qdeg=2))
    assert guessed == [L - q**2]
    # both annihilate each other's target
    assert vanishes(guessed[0], sq, ((-6, 10),))


def test_mul_by_constant_one():
    f = builtin("qpoch")
    one = constant(1, 1).with_system(AnnihilatorSystem.make(1, {0: L - 1}))
    P = closure_mul(f.system, one.system, 0)
    Q = f.system.direction(0)
    # equal up to a scalar factor
    (key, c) = Q.sorted_terms()[0]
    assert P * c == Q * P.coefficient(*key)


def test_mul_qpoch_qpochinv():
    h = closed_mul(builtin("qpoch"), builtin("qpochinv"))
    assert vanishes(h.system.direction(0), h, ((-6, 10),))


def test_affine_translation():
    f = builtin("qpoch")
    g = closed_affine(f, [[1]], [1])
    shifted = seq_affine(f, [[1]], [1])
    assert vanishes(g.system.direction(0), shifted, ((-6, 10),))


def test_affine_qpow2_doubled():
    g = closed_affine(builtin("qpow2"), [[2]])
    P = g.system.direction(0)
    assert P.l_degree(0) == 1
    target = parse_operator("L - q^4*M^8")
    (key, c) = target.sorted_terms()[0]
    assert P * c == target * P.coefficient(*key)


def test_affine_diagonal_of_delta2():
    g = closed_affine(builtin("delta2"), [[1], [1]])
    P = g.system.direction(0)
    assert P.l_degree(0) == 1
    assert vanishes(P, constant(1, 1), ((-6, 10),))


def test_affine_identity_idempotent():
    f = builtin("Gseq")
    sys = closure_affine(f.system, [[1, 0], [0, 1]], [0, 0])
    for P in sys.operators():
        assert vanishes(P, f, ((-6, 10), (-6, 10)))


def test_affine_requires_rectangular_system():
    partial = AnnihilatorSystem.make(2, {0: builtin("Gseq").system.direction(0)})
    with pytest.raises(ClosureError):
        closure_affine(partial, [[1], [1]])


def test_missing_direction():
    with pytest.raises(ClosureError):
        closure_sum(AnnihilatorSystem.make(1), builtin("qpow").system, 0)


def test_verification_error_carries_witness():
    with pytest.raises(VerificationError) as err:
        verify_operator(L - q, builtin("alt"), ((-2, 2),))
    assert err.value.point == (-2,)


PAIRS = [
    ("qpow", "alt"),
    ("qpoch", "delta"),
    ("qpoch", "qpochinv"),
    ("xqpoch", "qtri"),
    ("heaviside", "qpow2"),
    ("Gseq", "cex"),
    ("Fseq", "delta2"),
]


@pytest.mark.parametrize("a,b", PAIRS)
def test_closure_pairs_order_bounds_and_soundness(a, b):
    f, g = builtin(a), builtin(b)
    s, m = closed_sum(f, g), closed_mul(f, g)
    box = ((-6, 10),) * f.rank
    for i in range(f.rank):
        df, dg = f.system.order(i), g.system.order(i)
        assert s.system.order(i) <= df + dg
        assert m.system.order(i) <= df * dg
        # independent re-check through weyl_apply
        assert vanishes(s.system.direction(i), seq_add(f, g), box)
        assert vanishes(m.system.direction(i), seq_mul(f, g), box)
