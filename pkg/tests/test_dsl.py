import pytest
from hypothesis import given
from hypothesis import strategies as st

from qhol.dsl import (
    ArityError,
    BinOp,
    Call,
    DslSupportError,
    DslSyntaxError,
    Name,
    Neg,
    Num,
    Pow,
    Sum,
    UndeclaredVariable,
    UnknownFunction,
    compile_text,
    free_variables,
    parse,
    to_text,
)
from qhol.scalar import Scalar

q = Scalar.q()
x = Scalar.param("x")


@pytest.mark.parametrize(
    "text",
    [
        "qpoch(n)",
        "sum(k=0..n, qbinom(n,k) * (-1)^k * qtri(k))",
        "qpoch(n-k)",
        "subst(qpoch(n); n -> n-1)",
        "patch(delta(n); 0 -> 5, -1 -> x)",
        "conv(qpow(n), subst(delta(n); n->n-2))",
        "rescale(2, qpow(n))",
        "q^(n^3)",
        "sumZ(k, delta2(n,k)*qpow(k))",
        "-q^2*a - -(b-c)/2",
    ],
)
def test_round_trip(text):
    e = parse(text)
    assert parse(to_text(e)) == e


def test_builtin_call():
    f = compile_text("qpoch(n)")
    assert f.rank == 1 and f(3) == (1 - q) * (1 - q**2) * (1 - q**3)


def test_multisum_oracle():
    f = compile_text("sum(k=0..n, qbinom(n,k) * (-1)^k * qtri(k))")
    assert [f(n) for n in range(5)] == [1, 0, 0, 0, 0]


def test_affine_argument():
    f = compile_text("qpoch(n-k)")
    assert f.names == ("n", "k")
    assert f(3, 1) == (1 - q) * (1 - q**2)
    assert f(1, 3) == 0


def test_patch_and_params():
    f = compile_text("patch(delta(n); 0 -> 5, -1 -> x)", params=["x"])
    assert [f(n) for n in (-1, 0, 1)] == [x, 5, 0]


def test_convolution_and_sumz():
    f = compile_text("conv(qpow(n), subst(delta(n); n->n-2))")
    assert [f(n) for n in range(4)] == [q**-2, q**-1, 1, q]
    assert compile_text("sumZ(k, delta2(n,k)*qpow(k))", ["n"])(3) == q**3


def test_geometric_power_and_two_variable_builtin():
    assert compile_text("q^(n^3)")(2) == q**8
    assert compile_text("Hbin(n,k)")(2, 1) != 0


def test_rescale():
    assert compile_text("rescale(2, qpow(n))")(3) == q**6


def test_free_variables_order():
    assert free_variables(parse("qpoch(n-k) + qpow(m)")) == ["n", "k", "m"]


@pytest.mark.parametrize(
    "text,exc,code",
    [
        ("qpoch(n", DslSyntaxError, "syntax-error"),
        ("qpoch(n,k)", ArityError, "arity-mismatch"),
        ("foo(n)", UnknownFunction, "unknown-function"),
        ("qpoch(m)", UndeclaredVariable, "undeclared-variable"),
        ("sumZ(k, qpow(k))", DslSupportError, "support-error"),
    ],
)
def test_errors_are_distinct(text, exc, code):
    with pytest.raises(exc) as err:
        compile_text(text, ["n"])
    assert err.value.code == code
    assert err.value.to_json()["code"] == code


def test_syntax_error_position():
    with pytest.raises(DslSyntaxError) as err:
        parse("qpoch(n) +\n  * 2")
    doc = err.value.to_json()
    assert doc["line"] == 2 and doc["column"] >= 1


# -- round-trip property ------------------------------------------------------------

names = st.sampled_from(["n", "k", "q", "x"]).map(Name)
nums = st.integers(0, 20).map(Num)
leaves = st.one_of(names, nums)


def _extend(children):
    return st.one_of(
        children.map(Neg),
        st.builds(BinOp, st.sampled_from("+-*/"), children, children),
        st.builds(Pow, children, nums),
        st.builds(Call, st.sampled_from(["qpoch", "qpow"]), st.tuples(children)),
        st.builds(Call, st.sampled_from(["Gseq", "delta2"]), st.tuples(children, children)),
        st.builds(Sum, st.just("j"), children, children, children),
    )


expressions = st.recursive(leaves, _extend, max_leaves=12)


@given(expressions)
def test_print_parse_round_trip(e):
    assert parse(to_text(e)) == e
