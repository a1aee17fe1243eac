"""Helpers around the echelon kernel: ranks, kernels, rational reconstruction."""

from __future__ import annotations

from fractions import Fraction
from math import isqrt
from typing import Iterable, Sequence


def rank_mod(rows: Iterable[Sequence[int]], ncols: int, p: int) -> int:
    from . import ModEchelon

    ech = ModEchelon(ncols, p)
    ech.add_rows(rows)
    return ech.rank


def nullspace_mod(rows: Iterable[Sequence[int]], ncols: int, p: int) -> list[list[int]]:
    from . import ModEchelon

    ech = ModEchelon(ncols, p)
    for r in rows:
        ech.add_row(r)
    return ech.nullspace()


def rational_reconstruct(a: int, m: int) -> Fraction | None:
    """Find ``n/d`` with ``|n|, d <= sqrt(m/2)`` and ``n = a*d (mod m)``.

    Returns None when no such fraction exists (the usual half-extended
    Euclidean algorithm).
    """
    a %= m
    if a == 0:
        return Fraction(0)
    bound = isqrt(m // 2)
    r0, r1 = m, a
    s0, s1 = 0, 1
    while r1 > bound:
        qt = r0 // r1
        r0, r1 = r1, r0 - qt * r1
        s0, s1 = s1, s0 - qt * s1
    if s1 == 0 or abs(s1) > bound:
        return None
    frac = Fraction(r1, s1)
    if (frac.numerator - a * frac.denominator) % m != 0:
        return None
    return frac


def crt_pair(a1: int, m1: int, a2: int, m2: int) -> tuple[int, int]:
    """Combine residues modulo coprime moduli."""
    t = (a2 - a1) * pow(m1, -1, m2) % m2
    return a1 + m1 * t, m1 * m2
