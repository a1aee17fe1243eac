import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qhol.analysis import (
    CONSISTENT,
    EQUAL_CLAIM,
    EXCEEDS,
    FOUND,
    HK_CONVENTIONS,
    INCONCLUSIVE,
    NOT_EQUAL,
    NOT_FOUND,
    WindowTooSmall,
    classify_finiteness,
    determining_set,
    dimension_estimate,
    exceptional_points,
    filtration_monomials,
    filtration_rank,
    filtration_ranks,
    fit_degree,
    gaussian_binomial,
    hk_corrected_rhs,
    hk_display_rhs,
    prove_equal,
    resolve_hk_convention,
)
from qhol.catalog import builtin
from qhol.scalar import Scalar
from qhol.sequence import Sequence, constant, seq_mul
from qhol.system import AnnihilatorSystem
from qhol.weyl import parse_operator

q = Scalar.q()


# -- filtration ranks -----------------------------------------------------------


def test_monomial_count():
    assert len(filtration_monomials(1, 1)) == 3
    assert len(filtration_monomials(2, 2)) == 15


def test_qpoch_rank_oracle():
    # on [0, 10] the rows f, Mf, Lf satisfy Lf = f - q Mf and f, Mf are
    # independent (their ratio q^n is not constant): rank 2
    f = builtin("qpoch")
    rows = [[f(n) for n in range(11)], [q**n * f(n) for n in range(11)], [f(n + 1) for n in range(11)]]
    assert all(c == a - q * b for a, b, c in zip(*rows))
    assert rows[1][1] * rows[0][0] != rows[1][0] * rows[0][1]
    assert filtration_rank(f, 1, ((0, 10),)) == 2
    assert filtration_rank(f, 1, ((0, 10),), mode="exact") == 2


def test_zero_sequence_rank():
    assert filtration_ranks(constant(1, 0), 4) == [0] * 5


def test_window_too_small():
    with pytest.raises(WindowTooSmall):
        filtration_ranks(builtin("qpow"), 6, ((0, 3),))


@pytest.mark.parametrize("name", ["qpoch", "delta", "heaviside", "qpow2"])
def test_exact_matches_probabilistic(name):
    f = builtin(name)
    assert filtration_ranks(f, 4, mode="exact") == filtration_ranks(f, 4)


def test_fit_degree():
    assert fit_degree([1, 3, 5, 7, 9, 11]) == (1, 1)
    assert fit_degree([1, 4, 9, 16, 25, 36], segment=6) == (2, 2)
    assert fit_degree([1, 4, 9, 16, 25, 36]) == (None, 2)
    assert fit_degree([1, 2, 4, 8, 16, 32, 64])[0] is None


# -- dimension ------------------------------------------------------------------


@pytest.mark.parametrize("name,degree", [("qpoch", 1), ("delta", 1), ("heaviside", 1), ("qpow2", 1), ("Gseq", 2), ("delta2", 2)])
def test_dimension_of_builtins(name, degree):
    rep = dimension_estimate(builtin(name))
    assert rep.degree == degree
    assert rep.verdict == CONSISTENT


def test_dimension_of_cex():
    rep = dimension_estimate(builtin("cex"))
    assert rep.degree_estimate >= 3
    assert rep.verdict == EXCEEDS


def test_dimension_report_json_deterministic():
    a = dimension_estimate(builtin("qpoch"), seed=5).to_json()
    b = dimension_estimate(builtin("qpoch"), seed=5).to_json()
    assert json.dumps(a, sort_keys=True) == json.dumps(b, sort_keys=True)
    assert a["seed"] == 5


def test_dimension_requires_large_enough_K():
    with pytest.raises(ValueError):
        dimension_estimate(builtin("Gseq"), K=3)


def test_capped_window_is_inconclusive():
    # a sequence with no recurrence fills every row of a window that is
    # only as large as the monomial count, so nothing can be concluded
    generic = Sequence(1, lambda n, d: d.one / (d.qpow(n[0] ** 3) + d.from_int(3 * n[0] ** 2 + n[0] + 7)))
    rep = dimension_estimate(generic, K=4, window=((0, 14),))
    assert rep.ranks[-1] == 15
    assert rep.verdict == INCONCLUSIVE


@settings(max_examples=8)
@given(st.sampled_from(["qpoch", "xqpoch", "qpow2", "alt"]), st.integers(0, 1000))
def test_ranks_monotone_in_k(name, seed):
    ranks = filtration_ranks(builtin(name), 6, seed=seed)
    assert all(a <= b for a, b in zip(ranks, ranks[1:]))
    assert ranks[0] in (0, 1)


@settings(max_examples=8)
@given(st.sampled_from(["qpoch", "heaviside", "delta"]), st.integers(0, 3))
def test_ranks_monotone_in_window(name, extra):
    small = filtration_ranks(builtin(name), 4, ((0, 14),))
    large = filtration_ranks(builtin(name), 4, ((-extra, 14 + extra),))
    assert all(a <= b for a, b in zip(small, large))


@settings(max_examples=6)
@given(st.sampled_from(["qpoch", "qpow2", "delta", "qtri"]), st.integers(0, 1000))
def test_probabilistic_never_exceeds_exact(name, seed):
    f = builtin(name)
    exact = filtration_ranks(f, 4, mode="exact")
    prob = filtration_ranks(f, 4, trials=1, seed=seed)
    assert all(a <= b for a, b in zip(prob, exact))


# -- finiteness -----------------------------------------------------------------


def test_qpoch_integrally_finite():
    rep = classify_finiteness(builtin("qpoch"))
    assert rep.integrally_finite and rep.finite


def test_cex_finite_but_not_eliminable():
    rep = classify_finiteness(builtin("cex"))
    assert rep.finite
    assert rep.strongly_finite["M_n,L_n,L_k"] == NOT_FOUND


def test_zero_sequence_trivial():
    rep = classify_finiteness(constant(1, 0))
    assert rep.integrally_finite and rep.finite and rep.strongly_finite_evidence


def test_classify_with_given_system():
    sys = AnnihilatorSystem.make(1, {0: parse_operator("L - 1 + q*M")})
    rep = classify_finiteness(builtin("qpoch"), system=sys)
    assert rep.integrally_finite


@pytest.mark.parametrize("name", ["qpoch", "qpow2", "heaviside", "delta", "Gseq", "delta2"])
def test_implication_chain(name):
    f = builtin(name)
    rep = classify_finiteness(f)
    verdict = dimension_estimate(f).verdict
    if rep.integrally_finite:
        assert verdict == CONSISTENT
    if verdict == CONSISTENT:
        assert rep.finite
    if rep.strongly_finite_evidence:
        assert rep.finite


# -- zero recognition -------------------------------------------------------------


def test_prove_equal_heaviside():
    f = seq_mul(builtin("qpoch"), builtin("qpochinv"))
    res = prove_equal(f, builtin("heaviside"))
    assert res.status == EQUAL_CLAIM and res.equal
    res = prove_equal(f, builtin("heaviside"), S=[-1, 0, 1])
    assert res.status == EQUAL_CLAIM


def test_prove_equal_witness():
    res = prove_equal(builtin("qpow"), builtin("alt"))
    assert res.status == NOT_EQUAL
    n, a, b = res.witness
    assert n == 1 and a == q and b == -1


def test_prove_equal_rejects_short_point_set():
    f = seq_mul(builtin("qpoch"), builtin("qpochinv"))
    with pytest.raises(ValueError, match="misses"):
        prove_equal(f, builtin("heaviside"), S=[0])


def test_prove_equal_rejects_non_annihilator():
    sys = AnnihilatorSystem.make(1, {0: parse_operator("L - q")})
    with pytest.raises(ValueError):
        prove_equal(builtin("qpow"), builtin("alt"), sys=sys)


def test_exceptional_points():
    P = parse_operator("(1 - q*M)*L - (1 - q*M)^2")
    lead, trail = exceptional_points(P)
    assert lead == [-1] and trail == [-1]
    # the trailing coefficient vanishes at n = -1, so that value is needed too
    assert determining_set(P) == [-1, 0]


# -- extended q-binomial expansion -------------------------------------------------


def test_gaussian_binomial_base():
    assert gaussian_binomial(2, 1) == 1 + q
    assert gaussian_binomial(2, 1, 2) == 1 + q**2
    assert gaussian_binomial(2, 3) == 0


def test_hk_display_matches_no_convention():
    res = resolve_hk_convention(4)
    assert res.matching == []
    assert set(res.witnesses) == set(HK_CONVENTIONS)


def test_hk_corrected_expansion_broad():
    H = builtin("Hbin")
    for n in range(-3, 7):
        for k in range(0, 6):
            assert hk_corrected_rhs(n, k) == H(n, k)


def test_hk_display_k_one_has_no_inverse_power_of_x():
    # the product has an x^-1 term for k = 1, the displayed sum does not
    H = builtin("Hbin")
    x = Scalar.param("x")
    assert (H(1, 1) * x).substitute({"x": Scalar.from_int(0)}) != 0
    assert (hk_display_rhs(1, 1) * x).substitute({"x": Scalar.from_int(0)}) == 0
