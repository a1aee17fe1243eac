"""Rational nullspaces from modular images.

The guessing and telescoping code both solve homogeneous linear systems
whose unknowns are rational numbers and whose equations come from
evaluating sequences at specializations ``q -> q0`` modulo a prime.  Rows
are supplied lazily in batches (one batch per specialization) until the
nullity stops moving; the nullspace is brought into reduced row echelon
form, which is canonical, so images for different primes can be combined
by the Chinese remainder theorem before rational reconstruction.

Every caller verifies reconstructed vectors exactly; nothing here is
trusted on its own.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from math import lcm
from typing import Callable, Iterable, Sequence as Seq

from .domains import PRIMES, ModularDomain, random_modular_domain
from .linalg import ModEchelon, rational_reconstruct
from .linalg.modular import crt_pair

__all__ = ["ModularNullspace", "NullspaceImage", "reconstruct_rows", "integer_row", "modular_nullspace"]

RowBatch = Callable[[ModularDomain], Iterable[Seq[int]]]


@dataclass
class NullspaceImage:
    """RREF basis of a nullspace modulo ``p``."""

    p: int
    pivots: tuple[int, ...]
    rows: list[list[int]]
    equations: int
    batches: int

    @property
    def dimension(self) -> int:
        return len(self.rows)


def modular_nullspace(
    ncols: int,
    batch: RowBatch,
    p: int,
    rng: random.Random,
    params: tuple[str, ...] = (),
    min_batches: int = 1,
    max_batches: int = 64,
) -> NullspaceImage:
    """Add batches of rows until the rank is stable, return the RREF nullspace.

    ``batch(domain)`` returns the rows for one specialization; it may raise
    ``ZeroDivisionError`` when the specialization hits a pole, in which
    case another one is drawn.
    """
    ech = ModEchelon(ncols, p)
    used = 0
    equations = 0
    stable = 0
    failures = 0
    while used < max_batches:
        dom = random_modular_domain(rng, p, params)
        try:
            rows = [list(r) for r in batch(dom)]
        except ZeroDivisionError:
            failures += 1
            if failures > 16:
                raise
            continue
        used += 1
        equations += len(rows)
        before = ech.rank
        ech.add_rows(rows)
        if ech.rank == ncols:
            break
        if used >= min_batches:
            stable = stable + 1 if ech.rank == before else 0
            if stable >= 1:
                break
    null = ech.nullspace()
    red = ModEchelon(ncols, p)
    red.add_rows(null)
    rows = red.rows()
    pivots = tuple(red.pivots)
    return NullspaceImage(p, pivots, [list(map(int, r)) for r in rows], equations, used)


def reconstruct_rows(images: Seq[NullspaceImage], which: Iterable[int] | None = None) -> list[list[Fraction]] | None:
    """CRT-combine compatible images and rationally reconstruct rows.

    Returns ``None`` if the images disagree on pivots or some entry has no
    small rational preimage yet.
    """
    if not images:
        return None
    piv = images[0].pivots
    if any(im.pivots != piv for im in images):
        return None
    idx = list(range(len(images[0].rows))) if which is None else list(which)
    out = []
    for i in idx:
        residues = images[0].rows[i]
        m = images[0].p
        for im in images[1:]:
            residues = [crt_pair(a, m, b, im.p)[0] for a, b in zip(residues, im.rows[i])]
            m *= im.p
        row = []
        for a in residues:
            fr = rational_reconstruct(a, m)
            if fr is None:
                return None
            row.append(fr)
        out.append(row)
    return out


def integer_row(row: Seq[Fraction]) -> list[int]:
    """Scale a rational vector to coprime integers (sign unchanged)."""
    den = lcm(*(fr.denominator for fr in row)) if row else 1
    ints = [int(fr * den) for fr in row]
    from math import gcd

    g = 0
    for v in ints:
        g = gcd(g, v)
    if g > 1:
        ints = [v // g for v in ints]
    return ints


class ModularNullspace:
    """Drive :func:`modular_nullspace` over several primes.

    ``solve(select, accept)`` calls ``select(image)`` to choose the rows of
    interest (indices into the RREF basis), reconstructs them, and hands
    the rational rows to ``accept`` which returns True once they verify
    exactly.  More primes are used when reconstruction or verification
    fails.
    """

    def __init__(
        self,
        ncols: int,
        batch: RowBatch,
        params: tuple[str, ...] = (),
        seed: int = 0,
        min_batches: int = 1,
        max_batches: int = 64,
        primes: Seq[int] = PRIMES[:4],
    ):
        self.ncols = ncols
        self.batch = batch
        self.params = params
        self.rng = random.Random(seed)
        self.min_batches = min_batches
        self.max_batches = max_batches
        self.primes = list(primes)
        self.images: list[NullspaceImage] = []

    def image(self, p: int) -> NullspaceImage:
        return modular_nullspace(
            self.ncols, self.batch, p, self.rng, self.params, self.min_batches, self.max_batches
        )

    def solve(
        self,
        select: Callable[[NullspaceImage], list[int]],
        accept: Callable[[list[list[Fraction]]], bool],
    ) -> list[list[Fraction]] | None:
        compatible: list[NullspaceImage] = []
        for p in self.primes:
            im = self.image(p)
            self.images.append(im)
            if compatible and im.pivots != compatible[0].pivots:
                # an unlucky specialization leaves extra nullspace; keep the smaller one
                if im.dimension < compatible[0].dimension:
                    compatible = [im]
                continue
            compatible.append(im)
            which = select(compatible[0])
            if not which:
                return []
            rows = reconstruct_rows(compatible, which)
            if rows is not None and accept(rows):
                return rows
        return None
