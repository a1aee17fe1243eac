"""Commutative polynomial images of Weyl operators.

The closure and telescoping code works in the commutative ring
``Z[q, params, M_1..M_r]`` (flint ``fmpz_mpoly``): an operator is stored as
a map ``beta -> p_beta(q, M)`` meaning ``sum_beta p_beta(M) L^beta`` with
coefficients on the left.  Shifting a coefficient past ``L^s`` is the ring
map ``sigma^s : M_i -> q^{s_i} M_i``.

Only units are ever divided out of an identity: nonzero integers, factors
free of the ``M`` variables (nonzero for generic ``q`` and parameters) and
monomials in ``M`` (``q^{n_i}`` never vanishes).  Everything else is kept
as a multiplier, so identities derived here hold at every point of
``Z^r`` rather than only where some denominator is nonzero.
"""

from __future__ import annotations

from typing import Iterable, Mapping, Sequence as Seq

import flint

from .scalar import Scalar
from .weyl import WeylOperator

__all__ = ["PolyRing", "first_dependence", "strip_units"]

Vec = tuple[int, ...]


class PolyRing:
    """``Z[q, params..., M1..Mr]`` with conversions to and from Weyl operators."""

    def __init__(self, rank: int, params: Iterable[str] = ()):
        self.rank = rank
        self.params = tuple(sorted(set(params)))
        self.m_names = tuple(f"M{i + 1}" for i in range(rank))
        clash = set(self.params) & set(self.m_names)
        if clash:
            raise ValueError(f"parameter names {sorted(clash)} clash with shift variables")
        self.names = ("q",) + self.params + self.m_names
        self.ctx = flint.fmpz_mpoly_ctx.get(self.names, "lex")
        self.nvars = len(self.names)
        self.m0 = 1 + len(self.params)
        gens = self.ctx.gens()
        self.q = gens[0]
        self.M = gens[self.m0:]
        self.one = self.ctx.from_dict({(0,) * self.nvars: 1})
        self.zero = self.ctx.from_dict({})

    @classmethod
    def for_operators(cls, rank: int, ops: Iterable[WeylOperator], extra_params: Iterable[str] = ()):
        names = set(extra_params)
        for P in ops:
            names.update(P.params())
        return cls(rank, names)

    # -- scalars -------------------------------------------------------
    def _lift_scalar_poly(self, poly, shift: Seq[int] | None = None) -> dict:
        names = poly.context().names()
        idx = [self.names.index(n) for n in names]
        out = {}
        for e, c in poly.to_dict().items():
            key = [0] * self.nvars
            for j, ej in zip(idx, e):
                key[j] += int(ej)
            if shift is not None:
                for j, s in enumerate(shift):
                    key[self.m0 + j] += s
            out[tuple(key)] = out.get(tuple(key), 0) + int(c)
        return out

    def from_dict(self, d: Mapping) -> "flint.fmpz_mpoly":
        return self.ctx.from_dict({k: v for k, v in d.items() if v})

    def scalar_to_poly(self, c: Scalar):
        """Numerator of a polynomial Scalar (denominator must be 1)."""
        if not c.denominator.is_one():
            raise ValueError(f"{c} is not a polynomial")
        return self.from_dict(self._lift_scalar_poly(c.numerator))

    # -- operators -----------------------------------------------------
    def from_operator(self, P: WeylOperator) -> dict[Vec, object]:
        """Polynomial map ``beta -> p_beta`` for ``unit * P``.

        The unit clears every denominator (which only involves ``q`` and
        parameters) and every negative power of ``M`` and ``q``.
        """
        if P.rank != self.rank:
            raise ValueError("operator rank does not match ring rank")
        den = self.one
        for _, c in P.items():
            d = self.from_dict(self._lift_scalar_poly(c.denominator))
            den = den * d / den.gcd(d)
        raw: dict[Vec, dict] = {}
        for (alpha, beta), c in P.items():
            num = self.from_dict(self._lift_scalar_poly(c.numerator))
            d = self.from_dict(self._lift_scalar_poly(c.denominator))
            poly = num * (den / d)
            bucket = raw.setdefault(tuple(beta), {})
            for e, v in poly.to_dict().items():
                key = list(e)
                for j, a in enumerate(alpha):
                    key[self.m0 + j] += a
                key = tuple(key)
                bucket[key] = bucket.get(key, 0) + int(v)
        return self._normalize_dicts(raw)

    def _normalize_dicts(self, raw: Mapping[Vec, Mapping]) -> dict[Vec, object]:
        lows = [0] * self.nvars
        first = True
        for bucket in raw.values():
            for e, v in bucket.items():
                if not v:
                    continue
                if first:
                    lows = list(e)
                    first = False
                else:
                    lows = [min(a, b) for a, b in zip(lows, e)]
        # only q and M exponents may be negative; lift both to start at zero
        keep = [0] * self.nvars
        keep[0] = lows[0]
        for j in range(self.m0, self.nvars):
            keep[j] = lows[j]
        out = {}
        for beta, bucket in raw.items():
            d = {tuple(a - b for a, b in zip(e, keep)): v for e, v in bucket.items() if v}
            if any(x < 0 for e in d for x in e):
                raise ValueError("negative parameter exponent in operator coefficient")
            poly = self.ctx.from_dict(d)
            if not poly.is_zero():
                out[beta] = poly
        return out

    def to_operator(self, terms: Mapping[Vec, object], rank: int | None = None) -> WeylOperator:
        """Inverse of :meth:`from_operator` (no unit adjustment)."""
        rank = self.rank if rank is None else rank
        out: dict = {}
        for beta, poly in terms.items():
            groups: dict[Vec, dict] = {}
            for e, v in poly.to_dict().items():
                alpha = tuple(int(a) for a in e[self.m0:])
                rest = tuple(int(a) for a in e[: self.m0])
                g = groups.setdefault(alpha, {})
                g[rest] = g.get(rest, 0) + int(v)
            for alpha, d in groups.items():
                c = Scalar.from_dicts(self.params, d)
                if not c.is_zero():
                    out[(alpha, tuple(beta))] = c
        return WeylOperator(rank, out)

    # -- shifts ----------------------------------------------------------
    def sigma(self, poly, shift: Seq[int]):
        """``M_i -> q^{s_i} M_i`` for non-negative total q-exponent results.

        Returns ``(image, k)`` where ``image = q^k * sigma(poly)`` and ``k``
        is the smallest non-negative integer making the image polynomial.
        """
        if not any(shift):
            return poly, 0
        d = {}
        for e, v in poly.to_dict().items():
            qe = e[0] + sum(s * e[self.m0 + j] for j, s in enumerate(shift))
            d[(qe,) + tuple(e[1:])] = int(v)
        low = min((k[0] for k in d), default=0)
        k = -low if low < 0 else 0
        if k:
            d = {(e[0] + k,) + e[1:]: v for e, v in d.items()}
        return self.ctx.from_dict(d), k

    def sigma_exact(self, poly, shift: Seq[int]):
        """``sigma^shift(poly)`` when no negative q power can arise."""
        image, k = self.sigma(poly, shift)
        if k:
            raise ValueError("shift produced a negative power of q")
        return image

    def sigma_many(self, polys: Seq, shift: Seq[int]) -> list:
        """Shift a family jointly, scaling all by the same power of ``q``."""
        images = [self.sigma(p, shift) for p in polys]
        k = max((k for _, k in images), default=0)
        return [img * self.q ** (k - ki) if k != ki else img for img, ki in images]

    def is_unit_factor(self, poly) -> bool:
        degs = poly.degrees()
        m = degs[self.m0:]
        if not any(m):
            return True
        return poly.total_degree() == 1 and len(poly.to_dict()) == 1

    def uses_m(self, poly, i: int) -> bool:
        return poly.degrees()[self.m0 + i] > 0

    def substitute_m(self, poly, values: Mapping[int, object]):
        """Replace ``M_i`` by given polynomials (ring endomorphism)."""
        gens = list(self.ctx.gens())
        for i, v in values.items():
            gens[self.m0 + i] = v
        return poly.compose(*gens)


def strip_units(R: PolyRing, coeffs: Seq) -> list:
    """Divide a coefficient family by its unit content and fix the sign.

    The sign is chosen so that the first nonzero entry has a positive
    leading term; callers pass the coefficients highest shift first.
    """
    nz = [c for c in coeffs if not c.is_zero()]
    if not nz:
        return list(coeffs)
    g = nz[0]
    for c in nz[1:]:
        g = g.gcd(c)
        if g.is_one():
            break
    unit = R.one
    if not g.is_one():
        content, factors = g.factor()
        for fac, e in factors:
            if R.is_unit_factor(fac):
                unit = unit * fac**e
        unit = unit * abs(int(content))
    out = [c / unit if not unit.is_one() else c for c in coeffs]
    lead = next(c for c in out if not c.is_zero())
    if lead.leading_coefficient() < 0:
        out = [-c for c in out]
    return out


def _content_divide(R: PolyRing, vec: list) -> list:
    nz = [c for c in vec if not c.is_zero()]
    if not nz:
        return vec
    g = nz[0]
    for c in nz[1:]:
        if g.is_one():
            break
        g = g.gcd(c)
    if g.is_one() or g.is_zero():
        return vec
    return [c / g for c in vec]


def first_dependence(R: PolyRing, vectors: Iterable[Seq]):
    """Find the first ``t`` with ``v_0..v_t`` linearly dependent.

    Fraction-free incremental elimination over the polynomial ring.
    Returns the polynomial coefficients ``lambda_0..lambda_t`` of a
    dependence with ``lambda_t != 0``, or ``None`` if the iterable ends
    first.
    """
    basis: list[tuple[int, list, list]] = []
    for t, v in enumerate(vectors):
        w = list(v)
        combo = [R.zero] * t + [R.one]
        for pivot, bvec, bcombo in basis:
            a = w[pivot]
            if a.is_zero():
                continue
            b = bvec[pivot]
            w = [b * x - a * y for x, y in zip(w, bvec)]
            bc = bcombo + [R.zero] * (len(combo) - len(bcombo))
            combo = [b * x - a * y for x, y in zip(combo, bc)]
            joined = _content_divide(R, w + combo)
            w, combo = joined[: len(w)], joined[len(w):]
        pivot = next((j for j, x in enumerate(w) if not x.is_zero()), None)
        if pivot is None:
            return combo
        basis.append((pivot, w, combo))
    return None
