import random
import subprocess
import sys
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from qhol import linalg
from qhol.domains import PRIMES
from qhol.linalg import PyModEchelon, nullspace_mod, rank_mod, rational_reconstruct
from qhol.linalg.modular import crt_pair

P = PRIMES[0]

matrices = st.integers(1, 8).flatmap(
    lambda ncols: st.lists(st.lists(st.integers(-(10**12), 10**12), min_size=ncols, max_size=ncols), max_size=10)
    .map(lambda rows: (ncols, rows))
)


def backends():
    out = [PyModEchelon]
    if linalg.BACKEND == "compiled":
        out.append(linalg.ModEchelon)
    return out


@given(matrices)
def test_backends_agree(data):
    ncols, rows = data
    results = []
    for cls in backends():
        ech = cls(ncols, P)
        added = [ech.add_row(r) for r in rows]
        results.append((added, ech.rank, ech.pivots, ech.rows(), ech.nullspace()))
    assert all(r == results[0] for r in results)


@given(matrices)
def test_nullspace_is_kernel(data):
    ncols, rows = data
    basis = nullspace_mod(rows, ncols, P)
    assert len(basis) + rank_mod(rows, ncols, P) == ncols
    for v in basis:
        for r in rows:
            assert sum(a * b for a, b in zip(r, v)) % P == 0


def test_reduce_clears_pivots():
    ech = PyModEchelon(3, P)
    ech.add_row([1, 2, 3])
    red = ech.reduce([2, 0, 1])
    assert red[ech.pivots[0]] == 0


def test_row_length_checked():
    with pytest.raises(ValueError):
        PyModEchelon(3, P).add_row([1, 2])


def test_modulus_checked():
    with pytest.raises(ValueError):
        PyModEchelon(3, 1 << 31)


@given(st.integers(-1000, 1000), st.integers(1, 1000))
def test_rational_reconstruction_round_trip(n, d):
    m = P * PRIMES[1]
    x = Fraction(n, d)
    a = x.numerator * pow(x.denominator, -1, m) % m
    assert rational_reconstruct(a, m) == x


def test_crt_pair():
    a, m = crt_pair(3, 7, 4, 11)
    assert m == 77 and a % 7 == 3 and a % 11 == 4


def test_force_python_env():
    code = "from qhol import linalg; print(linalg.BACKEND)"
    out = subprocess.run(
        [sys.executable, "-c", code],
        env={"QHOL_FORCE_PYTHON": "1", "PATH": ""},
        capture_output=True,
        text=True,
        check=True,
    )
    assert out.stdout.strip() == "python"


def test_random_dense_agreement():
    rng = random.Random(7)
    rows = [[rng.randrange(P) for _ in range(40)] for _ in range(35)]
    ranks = {cls.__module__: rank_with(cls, rows) for cls in backends()}
    assert len(set(ranks.values())) == 1


def rank_with(cls, rows):
    ech = cls(len(rows[0]), P)
    ech.add_rows(rows)
    return ech.rank
