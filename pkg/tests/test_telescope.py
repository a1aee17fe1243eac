import json
from dataclasses import replace

import pytest

from qhol.catalog import builtin
from qhol.scalar import Scalar
from qhol.sequence import Sequence, seq_affine, seq_mul
from qhol.telescope import TelescopeNotFound, TelescopingBounds, telescope_check, telescope_search
from qhol.weyl import WeylOperator, weyl_apply


def summand() -> Sequence:
    on_k = [[0, 1]]
    f = seq_mul(seq_mul(builtin("Gseq"), seq_affine(builtin("alt"), on_k)), seq_affine(builtin("qtri"), on_k))
    return f.with_names(("n", "k"))


@pytest.fixture(scope="module")
def cert():
    return telescope_search(summand())


def direct_sum(f, n):
    return sum((f(n, k) for k in range(0, n + 1)), Scalar.from_int(0))


def test_direct_summation_oracle():
    f = summand()
    assert [direct_sum(f, n) for n in range(5)] == [1, 0, 0, 0, 0]


def test_certificate_annihilates_sum(cert):
    f = summand()
    T = cert.sum_operator()
    for n in range(0, 9 - T.l_degree(0)):
        assert weyl_apply(T, lambda m: direct_sum(f, m[0]), (n,)).is_zero()


def test_certificate_shape(cert):
    for (a, b), _ in cert.T.items():
        assert a[1] == 0 and b[1] == 0
    assert cert.status == "window-verified"


def test_check_natural(cert):
    check = telescope_check(summand(), cert, sum_window=(0, 8))
    assert check.ok
    assert check.status == "window-verified"


def test_check_bounded(cert):
    check = telescope_check(summand(), cert, mode="bounded", window=((0, 3), (-1, 5)))
    assert check.ok


def test_corrupted_certificate_gives_witness(cert):
    bad = replace(cert, R=cert.R + WeylOperator.one(2))
    check = telescope_check(summand(), bad)
    assert not check.ok
    assert check.witness is not None


def test_delta2_certificate():
    c = telescope_search(builtin("delta2"))
    check = telescope_check(builtin("delta2"), c, sum_window=(0, 6))
    assert check.ok
    # sum over k of delta(n, k) is the constant 1
    assert weyl_apply(c.sum_operator(), lambda m: Scalar.from_int(1), (3,)).is_zero()


def test_tiny_bounds_not_found():
    with pytest.raises(TelescopeNotFound, match="not found within bounds"):
        telescope_search(builtin("Gseq"), TelescopingBounds(0, 0, 0), retry=False)


def test_certificate_json_is_stable(cert):
    doc = json.loads(cert.dumps())
    assert set(doc) == {"axis", "T", "R", "window", "status"}
    assert cert.dumps() == cert.dumps()


def test_parameters_rejected():
    with pytest.raises(ValueError):
        telescope_search(builtin("Hbin"))
