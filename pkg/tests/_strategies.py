"""Hypothesis strategies shared by the property tests."""

import random

from hypothesis import strategies as st

from qhol.scalar import Scalar
from qhol.weyl import SymplecticMatrix, WeylOperator, mellin_matrix

small_ints = st.integers(min_value=-3, max_value=3)


@st.composite
def polys(draw, params=("x",), max_terms=3):
    """A small polynomial in q and the given parameters."""
    out = Scalar.from_int(0)
    for _ in range(draw(st.integers(0, max_terms))):
        c = draw(small_ints.filter(bool))
        term = Scalar.from_int(c) * Scalar.qpow(draw(st.integers(0, 3)))
        for p in params:
            term = term * Scalar.param(p) ** draw(st.integers(0, 2))
        out = out + term
    return out


@st.composite
def scalars(draw, params=("x",)):
    num = draw(polys(params))
    den = draw(polys(params).filter(lambda s: not s.is_zero()))
    return num / den


@st.composite
def nonzero_scalars(draw, params=("x",)):
    return draw(scalars(params).filter(lambda s: not s.is_zero()))


@st.composite
def operators(draw, rank=1, plus=True, max_terms=3, max_exp=2):
    """A sparse Weyl operator with small coefficients."""
    lo = 0 if plus else -max_exp
    terms = {}
    for _ in range(draw(st.integers(0, max_terms))):
        alpha = tuple(draw(st.integers(lo, max_exp)) for _ in range(rank))
        beta = tuple(draw(st.integers(lo, max_exp)) for _ in range(rank))
        c = Scalar.from_int(draw(small_ints.filter(bool))) * Scalar.qpow(draw(st.integers(-1, 2)))
        terms[(alpha, beta)] = c
    return WeylOperator(rank, terms)


def _elementary(rng: random.Random, r: int) -> SymplecticMatrix:
    kind = rng.randrange(4)
    eye = [[int(i == j) for j in range(r)] for i in range(r)]
    zero = [[0] * r for _ in range(r)]
    if kind == 3:
        return mellin_matrix(r)
    if kind == 2:
        # [[U, 0], [0, U^-T]] for an elementary unimodular U
        i, j = rng.sample(range(r), 2)
        c = rng.choice([-1, 1])
        U = [row[:] for row in eye]
        U[i][j] = c
        Uinv_T = [row[:] for row in eye]
        Uinv_T[j][i] = -c
        return SymplecticMatrix(U, zero, zero, Uinv_T)
    S = [[0] * r for _ in range(r)]
    for i in range(r):
        for j in range(i, r):
            S[i][j] = S[j][i] = rng.randint(-2, 2)
    return SymplecticMatrix(eye, S, zero, eye) if kind == 0 else SymplecticMatrix(eye, zero, S, eye)


def random_symplectic(rng: random.Random, r: int, length: int = 4) -> SymplecticMatrix:
    X = SymplecticMatrix.identity(r)
    for _ in range(length):
        X = X @ _elementary(rng, r)
    return X
