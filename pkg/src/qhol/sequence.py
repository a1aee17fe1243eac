"""Evaluable sequences on ``Z^r`` and the closure combinators.

A :class:`Sequence` wraps a pure evaluator ``(n, domain) -> value`` where
``domain`` is :data:`~qhol.domains.EXACT` or a modular specialization.  All
combinators build new evaluators from old ones; none of them constructs
annihilators (that is the job of :mod:`qhol.closure`).
"""

from __future__ import annotations

import functools
import itertools
import threading
from dataclasses import dataclass
from typing import Callable, Mapping, Sequence as Seq

from .domains import EXACT
from .scalar import Scalar, ScalarLike, as_scalar
from .system import AnnihilatorSystem, box_points
from .weyl import WeylOperator, weyl_apply

__all__ = [
    "Sequence",
    "SupportSpec",
    "OrthantPatch",
    "SupportError",
    "RecurrenceError",
    "constant",
    "seq_add",
    "seq_sub",
    "seq_neg",
    "seq_scale",
    "seq_mul",
    "seq_convolve",
    "seq_affine",
    "seq_restrict",
    "seq_extend",
    "seq_multisum",
    "seq_rescale_q",
    "seq_patch_finite",
    "seq_patch_hyperplane",
    "seq_patch_orthants",
    "seq_from_recurrence",
    "seq_apply_operator",
]

Point = tuple[int, ...]
Box = tuple[tuple[int, int], ...]

MEMO_SIZE = 1 << 16


class SupportError(ValueError):
    """A combinator needs support information that is missing or too weak."""


class RecurrenceError(ArithmeticError):
    """A recurrence cannot be solved at some point without extra data."""

    def __init__(self, message: str, n: int | None = None):
        super().__init__(message)
        self.n = n


# -- support ----------------------------------------------------------------


@dataclass(frozen=True)
class SupportSpec:
    """Support information for a sequence on ``Z^r = Z^k x Z^(r-k)``.

    ``box`` set (strict class): the sequence vanishes outside ``J x Z^(r-k)``
    with ``J`` the finite box ``box`` in the first ``k`` variables.

    ``bound`` set (prefix class): for every prefix ``m in Z^k`` the section
    ``n'' -> f(m, n'')`` vanishes outside the finite box ``bound(m)``;
    ``bound`` returns ``None`` for an empty section.
    """

    rank: int
    k: int
    box: Box | None = None
    bound: Callable[[Point], Box | None] | None = None

    def __post_init__(self):
        if not 0 <= self.k <= self.rank:
            raise ValueError("split index out of range")
        if (self.box is None) == (self.bound is None):
            raise ValueError("give exactly one of box (strict) or bound (prefix)")
        if self.box is not None:
            box = tuple((int(lo), int(hi)) for lo, hi in self.box)
            if len(box) != self.k:
                raise ValueError("strict box must have one range per prefix variable")
            object.__setattr__(self, "box", box)

    @property
    def strict(self) -> bool:
        return self.box is not None

    @classmethod
    def finite(cls, box: Box) -> "SupportSpec":
        """Finite support inside ``box`` (strict class with ``k = r``)."""
        return cls(len(box), len(box), box=tuple(box))

    def is_finite(self) -> bool:
        return self.strict and self.k == self.rank

    def contains(self, n: Point) -> bool:
        """False only where the sequence is known to vanish."""
        head, tail = n[: self.k], n[self.k :]
        if self.strict:
            return all(lo <= v <= hi for v, (lo, hi) in zip(head, self.box))
        b = self.bound(head)
        return b is not None and all(lo <= v <= hi for v, (lo, hi) in zip(tail, b))

    def prefix_bound(self, k: int) -> Callable[[Point], Box | None] | None:
        """A prefix-class bound for split index ``k`` if one follows."""
        if not self.strict and k == self.k:
            return self.bound
        if self.is_finite():
            box = self.box

            def bound(prefix, _box=box, _k=k):
                if all(lo <= v <= hi for v, (lo, hi) in zip(prefix, _box[:_k])):
                    return _box[_k:]
                return None

            return bound
        return None

    def translate(self, b: Point) -> "SupportSpec":
        """Support of ``n -> f(n + b)``."""
        if self.strict:
            box = tuple((lo - s, hi - s) for (lo, hi), s in zip(self.box, b))
            return SupportSpec(self.rank, self.k, box=box)
        head_b, tail_b = b[: self.k], b[self.k :]
        inner = self.bound

        def bound(prefix):
            bx = inner(tuple(v + s for v, s in zip(prefix, head_b)))
            if bx is None:
                return None
            return tuple((lo - s, hi - s) for (lo, hi), s in zip(bx, tail_b))

        return SupportSpec(self.rank, self.k, bound=bound)


# -- the sequence type ------------------------------------------------------


class Sequence:
    """A function ``Z^r -> Q(q, params)`` given by a pure evaluator.

    ``domain_convention`` is ``"Z"`` for sequences defined on all of ``Z^r``
    and ``"N"`` for sequences defined on ``N^r`` and extended by zero.
    """

    def __init__(
        self,
        rank: int,
        evaluator: Callable[[Point, object], object],
        *,
        names: Seq[str] | None = None,
        label: str = "",
        domain_convention: str = "Z",
        support: SupportSpec | None = None,
        system: AnnihilatorSystem | None = None,
        params: Seq[str] = (),
        memo_size: int = MEMO_SIZE,
    ):
        self.rank = int(rank)
        if names is None:
            names = ("n",) if self.rank == 1 else tuple(f"n{i + 1}" for i in range(self.rank))
        self.names = tuple(names)
        if len(self.names) != self.rank:
            raise ValueError("one name per variable expected")
        if domain_convention not in ("Z", "N"):
            raise ValueError("domain convention must be 'Z' or 'N'")
        if support is not None and support.rank != self.rank:
            raise ValueError("support spec rank mismatch")
        if system is not None and system.rank != self.rank:
            raise ValueError("annihilator system rank mismatch")
        self.label = label or "<sequence>"
        self.domain_convention = domain_convention
        self.support = support
        self.system = system
        self.params = tuple(sorted(params))
        self._raw = evaluator
        # lru_cache is internally synchronized; exceptions are not cached
        self._cached = functools.lru_cache(maxsize=memo_size)(self._compute)

    def _compute(self, n: Point, domain):
        if self.support is not None and not self.support.contains(n):
            return domain.zero
        return self._raw(n, domain)

    def eval(self, n: Seq[int], domain=EXACT):
        n = tuple(int(v) for v in n)
        if len(n) != self.rank:
            raise ValueError(f"{self.label}: expected a point of rank {self.rank}, got {n}")
        return self._cached(n, domain)

    def __call__(self, *n: int) -> Scalar:
        if len(n) == 1 and isinstance(n[0], (tuple, list)):
            n = tuple(n[0])
        return self.eval(n, EXACT)

    def values(self, box: Box, domain=EXACT) -> dict[Point, object]:
        return {n: self.eval(n, domain) for n in box_points(box)}

    def with_system(self, system: AnnihilatorSystem | None) -> "Sequence":
        return self._derive(system=system)

    def with_support(self, support: SupportSpec | None) -> "Sequence":
        return self._derive(support=support)

    def with_names(self, names: Seq[str]) -> "Sequence":
        return self._derive(names=tuple(names))

    def _derive(self, **changes) -> "Sequence":
        kw = dict(
            names=self.names,
            label=self.label,
            domain_convention=self.domain_convention,
            support=self.support,
            system=self.system,
            params=self.params,
        )
        kw.update(changes)
        out = Sequence(self.rank, self._raw, **kw)
        return out

    def cache_info(self):
        return self._cached.cache_info()

    def __repr__(self) -> str:
        return f"Sequence({self.label}, rank={self.rank})"

    # arithmetic sugar
    def __add__(self, other):
        return seq_add(self, _as_seq(other, self.rank))

    __radd__ = __add__

    def __sub__(self, other):
        return seq_sub(self, _as_seq(other, self.rank))

    def __neg__(self):
        return seq_neg(self)

    def __mul__(self, other):
        if isinstance(other, Sequence):
            return seq_mul(self, other)
        return seq_scale(self, other)

    __rmul__ = __mul__


def _as_seq(x, rank: int) -> Sequence:
    if isinstance(x, Sequence):
        return x
    return constant(rank, x)


def _params_union(*seqs: Sequence) -> tuple[str, ...]:
    out: set[str] = set()
    for s in seqs:
        out.update(s.params)
    return tuple(sorted(out))


def _check_rank(f: Sequence, g: Sequence) -> None:
    if f.rank != g.rank:
        raise ValueError(f"rank mismatch: {f.rank} vs {g.rank}")


def constant(rank: int, c: ScalarLike = 1, names: Seq[str] | None = None) -> Sequence:
    c = as_scalar(c)

    def ev(n, domain, _c=c):
        return domain.coerce(_c)

    support = SupportSpec.finite(((0, -1),) * rank) if c.is_zero() and rank else None
    if c.is_zero():
        dirs = {i: WeylOperator.one(rank) for i in range(rank)}
    else:
        dirs = {i: WeylOperator.L(i, rank) - 1 for i in range(rank)}
    system = AnnihilatorSystem.make(rank, dirs, note="constant")
    return Sequence(rank, ev, names=names, label=str(c), params=c.params, support=support, system=system)


def seq_add(f: Sequence, g: Sequence) -> Sequence:
    _check_rank(f, g)
    return Sequence(
        f.rank,
        lambda n, d: f.eval(n, d) + g.eval(n, d),
        names=f.names,
        label=f"({f.label} + {g.label})",
        support=_support_union(f.support, g.support),
        params=_params_union(f, g),
    )


def seq_neg(f: Sequence) -> Sequence:
    return Sequence(
        f.rank,
        lambda n, d: -f.eval(n, d),
        names=f.names,
        label=f"-{f.label}",
        support=f.support,
        domain_convention=f.domain_convention,
        params=f.params,
    )


def seq_sub(f: Sequence, g: Sequence) -> Sequence:
    return seq_add(f, seq_neg(g))


def seq_scale(f: Sequence, c: ScalarLike) -> Sequence:
    c = as_scalar(c)
    return Sequence(
        f.rank,
        lambda n, d: d.coerce(c) * f.eval(n, d),
        names=f.names,
        label=f"{c}*{f.label}" if not c.needs_parens() else f"({c})*{f.label}",
        support=f.support,
        domain_convention=f.domain_convention,
        params=tuple(sorted(set(f.params) | set(c.params))),
    )


def _support_union(a: SupportSpec | None, b: SupportSpec | None) -> SupportSpec | None:
    if a is None or b is None or a.k != b.k:
        return None
    if a.strict and b.strict:
        return SupportSpec(a.rank, a.k, box=tuple((min(x[0], y[0]), max(x[1], y[1])) for x, y in zip(a.box, b.box)))
    if not a.strict and not b.strict:
        fa, fb = a.bound, b.bound

        def bound(prefix):
            ba, bb = fa(prefix), fb(prefix)
            if ba is None:
                return bb
            if bb is None:
                return ba
            return tuple((min(x[0], y[0]), max(x[1], y[1])) for x, y in zip(ba, bb))

        return SupportSpec(a.rank, a.k, bound=bound)
    return None


def seq_mul(f: Sequence, g: Sequence) -> Sequence:
    """Pointwise (Hadamard) product."""
    _check_rank(f, g)

    def ev(n, d):
        a = f.eval(n, d)
        if d.is_zero(a):
            return d.zero
        return a * g.eval(n, d)

    support = f.support or g.support
    if f.support is not None and g.support is not None and g.support.strict and not f.support.strict:
        support = g.support
    return Sequence(
        f.rank,
        ev,
        names=f.names,
        label=f"{f.label}*{g.label}",
        support=support,
        params=_params_union(f, g),
    )


def seq_apply_operator(P: WeylOperator, f: Sequence) -> Sequence:
    """The sequence ``P f``."""
    if P.rank != f.rank:
        raise ValueError("rank mismatch")
    return Sequence(
        f.rank,
        lambda n, d: weyl_apply(P, f, n, d),
        names=f.names,
        label=f"[{P.to_str(f.names)}]{f.label}",
        params=tuple(sorted(set(f.params) | set(P.params()))),
    )


# -- convolution ------------------------------------------------------------


def _convolution_plan(f: Sequence, g: Sequence):
    """Return (k, prefix bound of f, strict box of g) or None."""
    if g.support is None or f.support is None and not (g.support.strict and g.support.k == g.rank):
        return None
    if not g.support.strict:
        return None
    k = g.support.k
    if k == f.rank:
        return k, None, g.support.box
    fb = f.support.prefix_bound(k) if f.support is not None else None
    if fb is None:
        return None
    return k, fb, g.support.box


def seq_convolve(f: Sequence, g: Sequence) -> Sequence:
    """``(f * g)(n) = sum_m g(m) f(n - m)`` over the certified finite range.

    Needs ``f`` in the prefix class and ``g`` in the strict class for the
    same split index (or the other way round).
    """
    _check_rank(f, g)
    plan = _convolution_plan(f, g)
    if plan is None:
        plan = _convolution_plan(g, f)
        if plan is None:
            raise SupportError(
                "convolution needs one factor with a strict support box and the other "
                "with finite sections for the same split index"
            )
        f, g = g, f
    k, fbound, gbox = plan
    r = f.rank

    def ev(n, d):
        head, tail = n[:k], n[k:]
        total = d.zero
        for mh in itertools.product(*(range(lo, hi + 1) for lo, hi in gbox)):
            rest = tuple(a - b for a, b in zip(head, mh))
            if k == r:
                tails = [()]
            else:
                fb = fbound(rest)
                if fb is None:
                    continue
                # n'' - m'' must lie in fb, so m'' ranges over n'' - fb
                tails = itertools.product(*(range(t - hi, t - lo + 1) for t, (lo, hi) in zip(tail, fb)))
            for mt in tails:
                m = mh + tuple(mt)
                gv = g.eval(m, d)
                if d.is_zero(gv):
                    continue
                total = total + gv * f.eval(tuple(a - b for a, b in zip(n, m)), d)
        return total

    support = None
    if f.support is not None and f.support.is_finite() and g.support.is_finite():
        support = SupportSpec.finite(
            tuple((a[0] + b[0], a[1] + b[1]) for a, b in zip(f.support.box, g.support.box))
        )
    return Sequence(r, ev, names=f.names, label=f"conv({f.label}, {g.label})", support=support, params=_params_union(f, g))


# -- substitutions ------------------------------------------------------------


def seq_affine(f: Sequence, A: Seq[Seq[int]], b: Seq[int] | None = None, names: Seq[str] | None = None) -> Sequence:
    """``g(n) = f(A n + b)`` with ``A`` an ``r x s`` integer matrix."""
    A = tuple(tuple(int(v) for v in row) for row in A)
    if len(A) != f.rank:
        raise ValueError(f"matrix has {len(A)} rows, sequence rank is {f.rank}")
    s = len(A[0]) if A else 0
    if any(len(row) != s for row in A):
        raise ValueError("ragged matrix")
    b = tuple(int(v) for v in (b if b is not None else (0,) * f.rank))
    if len(b) != f.rank:
        raise ValueError("offset length does not match sequence rank")

    def ev(n, d):
        m = tuple(sum(a * x for a, x in zip(row, n)) + bi for row, bi in zip(A, b))
        return f.eval(m, d)

    identity = s == f.rank and all(A[i][j] == int(i == j) for i in range(s) for j in range(s))
    support = f.support.translate(b) if identity and f.support is not None else None
    if names is None:
        names = f.names if s == f.rank else (("n",) if s == 1 else tuple(f"n{i + 1}" for i in range(s)))
    return Sequence(
        s,
        ev,
        names=names,
        label=f"subst({f.label}; A={[list(r) for r in A]}, b={list(b)})",
        support=support,
        params=f.params,
    )


def seq_restrict(f: Sequence, axis: int, a: int) -> Sequence:
    """Fix variable ``axis`` (0-based) to the value ``a``."""
    if not 0 <= axis < f.rank:
        raise ValueError(f"axis {axis} out of range for rank {f.rank}")
    r = f.rank
    A = []
    col = 0
    for i in range(r):
        row = [0] * (r - 1)
        if i != axis:
            row[col] = 1
            col += 1
        A.append(row)
    b = [0] * r
    b[axis] = a
    names = tuple(nm for i, nm in enumerate(f.names) if i != axis)
    return seq_affine(f, A, b, names=names)


def seq_extend(f: Sequence, name: str | None = None) -> Sequence:
    """Add a trailing variable that the sequence ignores."""
    r = f.rank
    A = [[int(i == j) for j in range(r + 1)] for i in range(r)]
    names = f.names + ((name or f"n{r + 1}"),)
    return seq_affine(f, A, [0] * r, names=names)


# -- sums ---------------------------------------------------------------------


def seq_multisum(f: Sequence, mode: str = "bounded", names: Seq[str] | None = None) -> Sequence:
    """Sum over the last variable.

    ``bounded``: ``h(n', a, b) = sum_{k=a..b} f(n', k)`` (rank ``r + 1``,
    empty sums are 0).  ``full``: ``g(n') = sum_{k in Z} f(n', k)`` which
    requires finite sections (prefix-class support with ``k = r - 1``).
    """
    r = f.rank
    if mode == "bounded":

        def ev(n, d):
            head, a, b = n[:-2], n[-2], n[-1]
            total = d.zero
            for k in range(a, b + 1):
                total = total + f.eval(head + (k,), d)
            return total

        names = names or f.names[:-1] + ("a", "b")
        return Sequence(r + 1, ev, names=names, label=f"sum({f.label})", params=f.params)
    if mode != "full":
        raise ValueError("mode must be 'bounded' or 'full'")
    if f.support is None:
        raise SupportError("a sum over the whole line needs a support spec with finite sections")
    bound = f.support.prefix_bound(r - 1)
    if bound is None:
        raise SupportError("the support spec does not give finite sections in the last variable")

    def ev_full(n, d):
        bx = bound(n)
        total = d.zero
        if bx is None:
            return total
        lo, hi = bx[0]
        for k in range(lo, hi + 1):
            total = total + f.eval(n + (k,), d)
        return total

    return Sequence(r - 1, ev_full, names=names or f.names[:-1], label=f"sumZ({f.label})", params=f.params)


def seq_rescale_q(f: Sequence, c: int) -> Sequence:
    """``n -> sigma(f(n))`` with ``sigma(q) = q**c``."""
    c = int(c)
    if c == 0:
        raise ValueError("rescale_q requires a nonzero exponent")

    def ev(n, d):
        if d.exact:
            return f.eval(n, d).rescale_q(c)
        return f.eval(n, d.rescaled(c))

    return Sequence(
        f.rank,
        ev,
        names=f.names,
        label=f"rescale({c}, {f.label})",
        support=f.support,
        domain_convention=f.domain_convention,
        params=f.params,
    )


# -- patching -----------------------------------------------------------------


def seq_patch_finite(f: Sequence, modifications: Mapping[Seq[int], ScalarLike]) -> Sequence:
    """Override finitely many values."""
    mods = {tuple(int(v) for v in k): as_scalar(c) for k, c in modifications.items()}
    for k in mods:
        if len(k) != f.rank:
            raise ValueError(f"point {k} does not have rank {f.rank}")

    def ev(n, d):
        if n in mods:
            return d.coerce(mods[n])
        return f.eval(n, d)

    params = set(f.params)
    for c in mods.values():
        params.update(c.params)
    return Sequence(f.rank, ev, names=f.names, label=f"patch({f.label})", params=tuple(params))


def seq_patch_hyperplane(f: Sequence, axis: int, a: int, g: Sequence) -> Sequence:
    """Replace the values on the hyperplane ``n_axis = a`` by ``g``."""
    if not 0 <= axis < f.rank:
        raise ValueError("axis out of range")
    if g.rank != f.rank - 1:
        raise ValueError("hyperplane data must have rank r - 1")

    def ev(n, d):
        if n[axis] == a:
            return g.eval(n[:axis] + n[axis + 1 :], d)
        return f.eval(n, d)

    return Sequence(f.rank, ev, names=f.names, label=f"patch({f.label}; axis {axis} = {a})", params=_params_union(f, g))


@dataclass(frozen=True)
class OrthantPatch:
    """One sequence on ``N^r`` per sign vector, pulled back by ``n -> eps n``."""

    rank: int
    pieces: tuple[tuple[tuple[int, ...], Sequence], ...]

    def __post_init__(self):
        pieces = dict(self.pieces)
        for eps, s in pieces.items():
            if len(eps) != self.rank or any(e not in (1, -1) for e in eps):
                raise ValueError(f"bad sign vector {eps}")
            if s.rank != self.rank:
                raise ValueError("piece rank mismatch")
        missing = [e for e in itertools.product((1, -1), repeat=self.rank) if e not in pieces]
        if missing:
            raise ValueError(f"missing orthants {missing}")

    @classmethod
    def make(cls, pieces: Mapping[tuple[int, ...], Sequence]) -> "OrthantPatch":
        rank = next(iter(pieces.values())).rank
        return cls(rank, tuple(pieces.items()))

    def piece(self, eps: tuple[int, ...]) -> Sequence:
        return dict(self.pieces)[eps]

    def face_mismatches(self, radius: int) -> list[tuple[tuple[int, ...], tuple[int, ...], tuple[int, ...]]]:
        """Points on coordinate hyperplanes where two orthant pieces disagree."""
        bad = []
        box = ((-radius, radius),) * self.rank
        for n in box_points(box):
            if 0 not in n:
                continue
            owners = [
                eps
                for eps in itertools.product((1, -1), repeat=self.rank)
                if all(v == 0 or (v > 0) == (e > 0) for v, e in zip(n, eps))
            ]
            vals = {}
            for eps in owners:
                m = tuple(e * v for e, v in zip(eps, n))
                vals[eps] = self.piece(eps)(m)
            ref_eps = owners[0]
            for eps in owners[1:]:
                if vals[eps] != vals[ref_eps]:
                    bad.append((n, ref_eps, eps))
        return bad


def seq_patch_orthants(p: OrthantPatch) -> Sequence:
    """Assemble a sequence on ``Z^r`` from its restrictions to the orthants.

    A point on a coordinate hyperplane is read from the orthant with ``+``
    in that coordinate; :meth:`OrthantPatch.face_mismatches` checks that
    the choice does not matter.
    """
    pieces = dict(p.pieces)

    def ev(n, d):
        eps = tuple(1 if v >= 0 else -1 for v in n)
        return pieces[eps].eval(tuple(e * v for e, v in zip(eps, n)), d)

    params = _params_union(*pieces.values())
    return Sequence(p.rank, ev, label="patch_orthants", params=params)


# -- recurrences ---------------------------------------------------------------


def seq_from_recurrence(system, initial: Mapping[int, ScalarLike], names: Seq[str] = ("n",)) -> Sequence:
    """Solve a one-variable recurrence forward and backward from ``initial``.

    ``system`` is an :class:`AnnihilatorSystem` of rank 1 or a rank-1
    :class:`WeylOperator`.  Values where the needed leading (forward) or
    trailing (backward) coefficient vanishes must be supplied in
    ``initial``.
    """
    P = system.direction(0) if isinstance(system, AnnihilatorSystem) else system
    if P.rank != 1:
        raise ValueError("recurrence solving is implemented for one variable")
    P = P.normalize_l()
    d = P.l_degree(0)
    coeffs = [dict() for _ in range(d + 1)]
    for (a, b), c in P.items():
        coeffs[b[0]][a[0]] = c
    if not coeffs[0] or not coeffs[d]:
        raise ValueError("operator needs nonzero leading and trailing coefficients")
    init = {int(k): as_scalar(v) for k, v in initial.items()}
    if d == 0:
        raise ValueError("an operator of order 0 does not define a recurrence")
    lo0, hi0 = min(init), max(init)
    if hi0 - lo0 + 1 < d:
        raise ValueError(f"initial values must cover at least {d} consecutive points")

    def coeff(j: int, n: int, dom):
        total = dom.zero
        for a, c in coeffs[j].items():
            total = total + dom.coerce(c) * dom.qpow(a * n)
        return total

    tables: dict = {}  # one value table per evaluation domain
    lock = threading.RLock()

    def ev(n_vec, dom):
        with lock:
            return _solve(n_vec[0], dom)

    def _solve(n, dom):
        table = tables.setdefault(dom, {})
        if n in table:
            return table[n]
        for k, v in init.items():
            table.setdefault(k, dom.coerce(v))
        if n in table:
            return table[n]
        if n > hi0:
            for m in range(hi0 + 1, n + 1):
                if m in table:
                    continue
                base = m - d
                lead = coeff(d, base, dom)
                if dom.is_zero(lead):
                    raise RecurrenceError(f"leading coefficient vanishes at n = {base}; supply f({m})", m)
                acc = dom.zero
                for j in range(d):
                    acc = acc + coeff(j, base, dom) * _lookup(table, base + j, m)
                table[m] = -acc / lead
            return table[n]
        if n < lo0:
            for m in range(lo0 - 1, n - 1, -1):
                if m in table:
                    continue
                trail = coeff(0, m, dom)
                if dom.is_zero(trail):
                    raise RecurrenceError(f"trailing coefficient vanishes at n = {m}; supply f({m})", m)
                acc = dom.zero
                for j in range(1, d + 1):
                    acc = acc + coeff(j, m, dom) * _lookup(table, m + j, m)
                table[m] = -acc / trail
            return table[n]
        # gap inside the initial range: solve forward from below
        for m in range(lo0, n + 1):
            if m in table:
                continue
            base = m - d
            lead = coeff(d, base, dom)
            if dom.is_zero(lead):
                raise RecurrenceError(f"leading coefficient vanishes at n = {base}; supply f({m})", m)
            acc = dom.zero
            for j in range(d):
                acc = acc + coeff(j, base, dom) * _lookup(table, base + j, m)
            table[m] = -acc / lead
        return table[n]

    return Sequence(1, ev, names=names, label=f"rec({P})", system=AnnihilatorSystem.make(1, {0: P}, note="defining recurrence"), params=P.params())


def _lookup(table: dict, k: int, target: int):
    try:
        return table[k]
    except KeyError:
        raise RecurrenceError(f"value f({k}) needed for f({target}) is not determined", k) from None
