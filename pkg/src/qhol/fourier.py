"""Truncated formal Fourier series ``sum_n f(n) z^n``.

A :class:`FormalSeries` stores the exact coefficients of a sequence on a
finite box together with what is known about the support of the full
sequence (per-axis bounds, ``None`` meaning unbounded).  The support bounds
decide on which box a product of two truncations is still exact.

The operator actions mirror those on sequences: ``M_i`` multiplies the
coefficient at ``n`` by ``q^{n_i}`` and ``L_i`` is multiplication by
``z_i^{-1}``, so the coefficient at ``n`` becomes the old one at
``n + e_i``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Mapping

from .domains import EXACT
from .scalar import ZERO, Scalar
from .sequence import Sequence

__all__ = [
    "SeriesOverflow",
    "FormalSeries",
    "fourier_truncate",
    "series_op",
    "hadamard",
    "series_mul",
    "series_equal",
]

Box = tuple[tuple[int, int], ...]
Bound = tuple[int | None, int | None]


class SeriesOverflow(ValueError):
    """A product was requested beyond the box on which it is exact."""


def _points(box: Box):
    return itertools.product(*(range(lo, hi + 1) for lo, hi in box))


@dataclass(frozen=True)
class FormalSeries:
    """Coefficients on ``box`` plus per-axis support bounds of the full series."""

    box: Box
    coeffs: Mapping[tuple[int, ...], Scalar]
    support: tuple[Bound, ...]

    def __post_init__(self):
        box = tuple((int(lo), int(hi)) for lo, hi in self.box)
        if any(lo > hi for lo, hi in box):
            raise ValueError(f"empty truncation box {box}")
        object.__setattr__(self, "box", box)
        if len(self.support) != len(box):
            raise ValueError("one support bound per axis expected")

    @property
    def rank(self) -> int:
        return len(self.box)

    def in_box(self, n) -> bool:
        return all(lo <= v <= hi for v, (lo, hi) in zip(n, self.box))

    def known_zero(self, n) -> bool:
        """True where the full sequence is known to vanish."""
        for v, (lo, hi) in zip(n, self.support):
            if (lo is not None and v < lo) or (hi is not None and v > hi):
                return True
        return False

    def __getitem__(self, n) -> Scalar:
        n = tuple(n)
        if self.in_box(n):
            return self.coeffs.get(n, ZERO)
        if self.known_zero(n):
            return ZERO
        raise KeyError(f"coefficient at {n} lies outside the truncation box {self.box}")

    def restrict(self, box: Box) -> "FormalSeries":
        box = tuple(box)
        coeffs = {n: self[n] for n in _points(box)}
        return FormalSeries(box, {n: c for n, c in coeffs.items() if not c.is_zero()}, self.support)

    def nonzero(self) -> dict[tuple[int, ...], Scalar]:
        return {n: c for n, c in self.coeffs.items() if not c.is_zero()}

    def __str__(self) -> str:
        terms = []
        for n in sorted(self.nonzero()):
            mono = "*".join(f"z{i + 1}^{e}" if self.rank > 1 else f"z^{e}" for i, e in enumerate(n) if e)
            c = str(self.coeffs[n])
            terms.append(f"({c})*{mono}" if mono else f"({c})")
        return " + ".join(terms) if terms else "0"


def _support_of(f: Sequence) -> tuple[Bound, ...]:
    bounds: list[Bound] = [(None, None)] * f.rank
    if f.domain_convention == "N":
        bounds = [(0, None)] * f.rank
    spec = f.support
    if spec is not None and spec.strict:
        for i, (lo, hi) in enumerate(spec.box):
            a, b = bounds[i]
            bounds[i] = (lo if a is None else max(a, lo), hi if b is None else min(b, hi))
    return tuple(bounds)


def fourier_truncate(f: Sequence, box: Box) -> FormalSeries:
    """The coefficients ``f(n)`` for ``n`` in ``box``."""
    box = tuple(tuple(b) for b in box)
    if len(box) != f.rank:
        raise ValueError("box rank does not match the sequence")
    coeffs = {}
    for n in _points(box):
        v = f.eval(n, EXACT)
        if not v.is_zero():
            coeffs[n] = v
    return FormalSeries(box, coeffs, _support_of(f))


def series_op(op: str, i: int, s: FormalSeries) -> FormalSeries:
    """Apply ``M_i`` (``op="M"``) or ``L_i`` (``op="L"``) to a series."""
    if not 0 <= i < s.rank:
        raise ValueError(f"axis {i} out of range")
    if op == "M":
        coeffs = {n: c * Scalar.qpow(n[i]) for n, c in s.nonzero().items()}
        return FormalSeries(s.box, coeffs, s.support)
    if op == "L":
        def shift(n):
            return n[:i] + (n[i] - 1,) + n[i + 1:]

        box = s.box[:i] + ((s.box[i][0] - 1, s.box[i][1] - 1),) + s.box[i + 1:]
        lo, hi = s.support[i]
        sup = s.support[:i] + ((None if lo is None else lo - 1, None if hi is None else hi - 1),) + s.support[i + 1:]
        return FormalSeries(box, {shift(n): c for n, c in s.nonzero().items()}, sup)
    raise ValueError(f"unknown operator {op!r}; expected 'M' or 'L'")


def _meet(a: Box, b: Box) -> Box:
    out = tuple((max(x[0], y[0]), min(x[1], y[1])) for x, y in zip(a, b))
    if any(lo > hi for lo, hi in out):
        raise ValueError(f"boxes {a} and {b} do not overlap")
    return out


def _meet_bound(a: Bound, b: Bound) -> Bound:
    lo = a[0] if b[0] is None else b[0] if a[0] is None else max(a[0], b[0])
    hi = a[1] if b[1] is None else b[1] if a[1] is None else min(a[1], b[1])
    return (lo, hi)


def hadamard(s: FormalSeries, t: FormalSeries) -> FormalSeries:
    """Coefficientwise product on the common box."""
    if s.rank != t.rank:
        raise ValueError("rank mismatch")
    box = _meet(s.box, t.box)
    coeffs = {}
    for n in _points(box):
        a, b = s.coeffs.get(n), t.coeffs.get(n)
        if a is not None and b is not None:
            coeffs[n] = a * b
    support = tuple(_meet_bound(x, y) for x, y in zip(s.support, t.support))
    return FormalSeries(box, coeffs, support)


def _exact_range(s_box, s_sup: Bound, t_box, t_sup: Bound) -> tuple[int, int] | None:
    """Per-axis range of ``n`` where ``sum_a s(a) t(n - a)`` is fully known.

    Every ``a`` that can contribute must lie in the box of ``s`` and every
    ``n - a`` in the box of ``t``; with unbounded supports this only holds
    when both sides are bounded in a compatible direction.
    """
    sl, sh = s_sup
    tl, th = t_sup
    # n is known exactly when [max(sl, n - th), min(sh, n - tl)] sits inside
    # s_box and its reflection n - [..] sits inside t_box
    lo_cands, hi_cands = [], []
    # lower end of the contributing a-range: max(sl, n - th) >= s_box.lo
    if sl is not None and sl >= s_box[0]:
        pass
    elif th is not None:
        lo_cands.append(s_box[0] + th)
    else:
        return None
    # upper end: min(sh, n - tl) <= s_box.hi
    if sh is not None and sh <= s_box[1]:
        pass
    elif tl is not None:
        hi_cands.append(s_box[1] + tl)
    else:
        return None
    # b = n - a ranges over [max(tl, n - sh), min(th, n - sl)] and must fit t_box
    if tl is not None and tl >= t_box[0]:
        pass
    elif sh is not None:
        lo_cands.append(t_box[0] + sh)
    else:
        return None
    if th is not None and th <= t_box[1]:
        pass
    elif sl is not None:
        hi_cands.append(t_box[1] + sl)
    else:
        return None
    lo = max(lo_cands) if lo_cands else None
    hi = min(hi_cands) if hi_cands else None
    # outside the Minkowski sum of the supports every coefficient is zero
    base_lo = None if sl is None or tl is None else sl + tl
    base_hi = None if sh is None or th is None else sh + th
    if lo is None:
        lo = base_lo if base_lo is not None else s_box[0] + t_box[0]
    if hi is None:
        hi = base_hi if base_hi is not None else s_box[1] + t_box[1]
    return (lo, hi)


def series_mul(s: FormalSeries, t: FormalSeries, box: Box | None = None) -> FormalSeries:
    """Product of power series, exact on ``box``.

    Without ``box`` the largest box on which the truncations determine the
    product is used.  Raises :class:`SeriesOverflow` when the requested box
    needs coefficients outside the inputs' boxes.
    """
    if s.rank != t.rank:
        raise ValueError("rank mismatch")
    exact = []
    for i in range(s.rank):
        rng = _exact_range(s.box[i], s.support[i], t.box[i], t.support[i])
        if rng is None:
            raise SeriesOverflow(
                f"axis {i + 1}: the product of two series with unbounded support on the same side is not defined"
            )
        exact.append(rng)
    exact_box = tuple(exact)
    if box is None:
        box = exact_box
    box = tuple(tuple(b) for b in box)
    for i, ((lo, hi), (elo, ehi)) in enumerate(zip(box, exact_box)):
        if lo < elo or hi > ehi:
            raise SeriesOverflow(
                f"axis {i + 1}: the product is exact only on {elo}..{ehi}; enlarge the input boxes to reach {lo}..{hi}"
            )
    if any(lo > hi for lo, hi in box):
        raise SeriesOverflow("the input boxes are too small for any exact coefficient")
    s_nz, t_nz = s.nonzero(), t.nonzero()
    coeffs: dict = {}
    for a, x in s_nz.items():
        for b, y in t_nz.items():
            n = tuple(u + v for u, v in zip(a, b))
            if all(lo <= v <= hi for v, (lo, hi) in zip(n, box)):
                coeffs[n] = coeffs.get(n, ZERO) + x * y
    support = []
    for (sl, sh), (tl, th) in zip(s.support, t.support):
        support.append((None if sl is None or tl is None else sl + tl, None if sh is None or th is None else sh + th))
    return FormalSeries(box, {n: c for n, c in coeffs.items() if not c.is_zero()}, tuple(support))


def series_equal(s: FormalSeries, t: FormalSeries, box: Box | None = None) -> bool:
    """Coefficientwise equality on ``box`` (default: the common box)."""
    box = _meet(s.box, t.box) if box is None else tuple(box)
    return all(s[n] == t[n] for n in _points(box))
