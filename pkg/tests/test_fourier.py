import pytest
from hypothesis import given
from hypothesis import strategies as st

from qhol.catalog import builtin
from qhol.fourier import (
    FormalSeries,
    SeriesOverflow,
    fourier_truncate,
    hadamard,
    series_equal,
    series_mul,
    series_op,
)
from qhol.scalar import Scalar
from qhol.sequence import SupportSpec, seq_affine, seq_apply_operator, seq_convolve, seq_mul
from qhol.weyl import WeylOperator

q = Scalar.q()
BOX = ((-5, 5),)
PAIRS = [("qpow", "alt"), ("qpoch", "xqpoch"), ("heaviside", "qpow2"), ("delta", "qtri"), ("qpochinv", "qpow")]


def truncated(name, box):
    return builtin(name).with_support(SupportSpec.finite(box))


def test_delta_is_one():
    s = fourier_truncate(builtin("delta"), ((-3, 3),))
    assert str(s) == "(1)"
    assert s.nonzero() == {(0,): Scalar.from_int(1)}


def test_outside_box_lookup():
    s = fourier_truncate(builtin("qpoch"), ((0, 4),))
    assert s[(-3,)] == 0  # known zero by the N convention
    with pytest.raises(KeyError):
        s[(9,)]


@pytest.mark.parametrize("name", ["qpow", "qpoch", "xqpoch", "qpow2", "heaviside"])
def test_intertwining(name):
    f = builtin(name)
    F = fourier_truncate(f, BOX)
    for op, W in (("L", WeylOperator.L()), ("M", WeylOperator.M())):
        image = series_op(op, 0, F)
        direct = fourier_truncate(seq_apply_operator(W, f), image.box)
        assert series_equal(direct, image)


@pytest.mark.parametrize("a,b", PAIRS)
def test_hadamard_is_pointwise_product(a, b):
    f, g = builtin(a), builtin(b)
    assert series_equal(fourier_truncate(seq_mul(f, g), BOX), hadamard(fourier_truncate(f, BOX), fourier_truncate(g, BOX)))


@pytest.mark.parametrize("a,b", PAIRS)
def test_shift_of_product(a, b):
    # L(fg) = (Lf)(Lg)
    F, G = fourier_truncate(builtin(a), BOX), fourier_truncate(builtin(b), BOX)
    assert series_equal(series_op("L", 0, hadamard(F, G)), hadamard(series_op("L", 0, F), series_op("L", 0, G)))


@pytest.mark.parametrize("a,b", PAIRS)
def test_convolution_is_series_product(a, b):
    f, g = truncated(a, ((-2, 3),)), truncated(b, ((0, 4),))
    conv = seq_convolve(f, g)
    prod = series_mul(fourier_truncate(f, ((-2, 3),)), fourier_truncate(g, ((0, 4),)))
    assert series_equal(prod, fourier_truncate(conv, prod.box))
    # L(f * g) = (Lf) * g
    Lf = seq_apply_operator(WeylOperator.L(), f)
    shifted = series_op("L", 0, prod)
    assert series_equal(shifted, fourier_truncate(seq_convolve(Lf.with_support(SupportSpec.finite(((-3, 2),))), g), shifted.box))


def test_series_mul_with_shifted_delta():
    f = builtin("qpow")
    shift = seq_affine(builtin("delta"), [[1]], [-2])
    S = series_mul(fourier_truncate(f, ((-5, 5),)), fourier_truncate(shift, ((0, 4),)))
    assert series_equal(S, fourier_truncate(seq_convolve(f, shift), S.box))


def test_series_mul_overflow():
    F, G = fourier_truncate(builtin("qpow"), BOX), fourier_truncate(builtin("alt"), BOX)
    with pytest.raises(SeriesOverflow):
        series_mul(F, G)
    D = fourier_truncate(seq_affine(builtin("delta"), [[1]], [-2]), ((0, 4),))
    with pytest.raises(SeriesOverflow):
        series_mul(F, D, box=((-10, 10),))


def test_unknown_operator():
    with pytest.raises(ValueError):
        series_op("X", 0, fourier_truncate(builtin("qpow"), BOX))


@given(st.sampled_from(["qpow", "qpoch", "alt", "xqpoch", "Gseq"]), st.integers(0, 1))
def test_defining_relation_on_series(name, axis):
    f = builtin(name)
    box = ((-3, 4),) * f.rank
    axis = min(axis, f.rank - 1)
    F = fourier_truncate(f, box)
    lhs = series_op("L", axis, series_op("M", axis, F))
    ml = series_op("M", axis, series_op("L", axis, F))
    rhs = FormalSeries(ml.box, {n: q * c for n, c in ml.nonzero().items()}, ml.support)
    assert series_equal(lhs, rhs)
