"""Annihilators for sums, products and affine substitutions.

Every construction manipulates identities of the form

    c_t(M) * L^t f = sum_j B_{t,j}(M) * L^j f        (j in a finite basis)

with polynomial ``c_t`` and ``B_{t,j}``.  New identities come from shifting
old ones and multiplying through by leading coefficients; nothing is ever
divided except units (see :mod:`qhol.polyring`).  A polynomial linear
dependence ``sum_t lambda_t B_t = 0`` then yields the operator
``sum_t lambda_t c_t L^t`` which annihilates the target at *every* point,
not just away from the zeros of some leading coefficient.  The window
verification that follows is therefore a consistency check of the input
claims, not a patch over divisions.
"""

from __future__ import annotations

from typing import Sequence as Seq

from .polyring import PolyRing, first_dependence, strip_units
from .sequence import Sequence, seq_add, seq_affine, seq_mul
from .system import AnnihilatorSystem
from .weyl import WeylOperator

__all__ = [
    "ClosureError",
    "DegenerateStratumError",
    "DEFAULT_CLOSURE_WINDOW",
    "closure_sum",
    "closure_mul",
    "closure_affine",
    "closed_sum",
    "closed_mul",
    "closed_affine",
    "direction_polys",
    "positive_first",
]

DEFAULT_CLOSURE_WINDOW = (-6, 10)

Vec = tuple[int, ...]


class ClosureError(ArithmeticError):
    """A closure construction could not run on the given input."""


class DegenerateStratumError(ClosureError):
    """The substituted operator vanished identically.

    This happens when the leading data of ``f`` lives on the very stratum
    selected by the substitution (the diagonal of a delta, say).  The
    guessing module has no such precondition and is the suggested fallback.
    """


# -- helpers ------------------------------------------------------------------


def _unit_reduce(R: PolyRing, c, B: list):
    """Divide an identity ``(c, B)`` by the unit part of its content."""
    g = c
    for b in B:
        if g.is_one():
            return c, B
        if not b.is_zero():
            g = g.gcd(b)
    if g.is_one():
        return c, B
    content, factors = g.factor()
    unit = R.one * abs(int(content))
    for fac, e in factors:
        if R.is_unit_factor(fac):
            unit = unit * fac**e
    if unit.is_one():
        return c, B
    return c / unit, [b / unit for b in B]


def _lcm(a, b):
    g = a.gcd(b)
    return a * (b / g)


def direction_polys(R: PolyRing, P: WeylOperator, i: int) -> list:
    """``[p_0, ..., p_d]`` with ``unit * P = sum_j p_j(M) L_i^j`` and ``p_0 != 0``."""
    terms = R.from_operator(P)
    if not terms:
        raise ClosureError("zero operator")
    for beta in terms:
        if any(b for j, b in enumerate(beta) if j != i):
            raise ClosureError(f"operator {P} involves shifts other than direction {i}")
    low = min(beta[i] for beta in terms)
    high = max(beta[i] for beta in terms)
    out = [R.zero] * (high - low + 1)
    for beta, p in terms.items():
        out[beta[i] - low] = p
    return out


def _identities(R: PolyRing, p: list, i: int):
    """Yield ``(c_t, B_t)`` for ``t = 0, 1, ...`` in the basis ``L_i^0..L_i^{d-1}``."""
    d = len(p) - 1
    shift = [0] * R.rank
    shift[i] = 1
    if d == 0:
        c = p[0]
        while True:
            yield c, []
            c = R.sigma_exact(c, shift)
    for t in range(d):
        yield R.one, [R.one if j == t else R.zero for j in range(d)]
    c, B = R.one, [R.one if j == d - 1 else R.zero for j in range(d)]
    lead = p[d]
    while True:
        sc = R.sigma_exact(c, shift)
        sB = [R.sigma_exact(b, shift) for b in B]
        top = sB[d - 1]
        newB = [R.zero] + [lead * b for b in sB[: d - 1]]
        if not top.is_zero():
            newB = [nb - top * pj for nb, pj in zip(newB, p[:d])]
        c, B = _unit_reduce(R, lead * sc, newB)
        yield c, B


def _ring_for(*systems: AnnihilatorSystem) -> PolyRing:
    rank = systems[0].rank
    ops = [P for s in systems for P in s.operators()]
    return PolyRing.for_operators(rank, ops)


def _assemble(R: PolyRing, i: int, coeffs: list) -> WeylOperator:
    """Operator ``sum_t coeffs[t] L_i^t`` with units stripped."""
    stripped = strip_units(R, coeffs[::-1])[::-1]
    terms = {}
    for t, c in enumerate(stripped):
        if not c.is_zero():
            beta = [0] * R.rank
            beta[i] = t
            terms[tuple(beta)] = c
    return positive_first(R.to_operator(terms))


def positive_first(P: WeylOperator) -> WeylOperator:
    """``+-P`` chosen so that the first printed term has a positive sign."""
    if P.is_zero():
        return P
    _, c = P.sorted_terms()[0]
    return -P if c.numerator.leading_coefficient() < 0 else P


def _require_direction(sys: AnnihilatorSystem, i: int, label: str) -> WeylOperator:
    if not sys.has_direction(i):
        raise ClosureError(f"{label} has no operator for direction {i}")
    return sys.direction(i)


# -- sum and product ----------------------------------------------------------


def closure_sum(fsys: AnnihilatorSystem, gsys: AnnihilatorSystem, i: int) -> WeylOperator:
    """An operator in direction ``i`` annihilating ``f + g``.

    Its ``L_i``-degree is at most ``d_f + d_g`` (asserted).
    """
    if fsys.rank != gsys.rank:
        raise ClosureError("rank mismatch")
    R = _ring_for(fsys, gsys)
    pf = direction_polys(R, _require_direction(fsys, i, "first system"), i)
    pg = direction_polys(R, _require_direction(gsys, i, "second system"), i)
    df, dg = len(pf) - 1, len(pg) - 1
    C: list = []

    def vectors():
        for (cf, Bf), (cg, Bg) in zip(_identities(R, pf, i), _identities(R, pg, i)):
            Ct = _lcm(cf, cg)
            C.append(Ct)
            mf, mg = Ct / cf, Ct / cg
            yield [mf * b for b in Bf] + [mg * b for b in Bg]
            if len(C) > df + dg + 1:
                return

    lam = first_dependence(R, vectors())
    if lam is None:
        raise ClosureError("internal error: no dependence within the degree bound")
    op = _assemble(R, i, [l * c for l, c in zip(lam, C)])
    assert op.l_degree(i) <= df + dg, "closure_sum exceeded its order bound"
    return op


def closure_mul(fsys: AnnihilatorSystem, gsys: AnnihilatorSystem, i: int) -> WeylOperator:
    """An operator in direction ``i`` annihilating ``f * g`` (degree at most ``d_f d_g``)."""
    if fsys.rank != gsys.rank:
        raise ClosureError("rank mismatch")
    R = _ring_for(fsys, gsys)
    pf = direction_polys(R, _require_direction(fsys, i, "first system"), i)
    pg = direction_polys(R, _require_direction(gsys, i, "second system"), i)
    df, dg = len(pf) - 1, len(pg) - 1
    C: list = []

    def vectors():
        for (cf, Bf), (cg, Bg) in zip(_identities(R, pf, i), _identities(R, pg, i)):
            C.append(cf * cg)
            yield [a * b for a in Bf for b in Bg]
            if len(C) > df * dg + 1:
                return

    lam = first_dependence(R, vectors())
    if lam is None:
        raise ClosureError("internal error: no dependence within the degree bound")
    op = _assemble(R, i, [l * c for l, c in zip(lam, C)])
    assert op.l_degree(i) <= df * dg, "closure_mul exceeded its order bound"
    return op


# -- affine substitution ------------------------------------------------------


class _BoxReducer:
    """Express ``c * L^beta f`` in the box basis of a rectangular system."""

    def __init__(self, R: PolyRing, polys: list[list]):
        self.R = R
        self.p = polys
        self.d = [len(pi) - 1 for pi in polys]
        self.basis = [beta for beta in _box(self.d)]
        self.index = {beta: k for k, beta in enumerate(self.basis)}
        self.memo: dict[Vec, tuple] = {}

    def reduce(self, beta: Vec):
        # iterative post-order walk so that long shifts cannot hit the recursion limit
        stack = [beta]
        while stack:
            cur = stack[-1]
            if cur in self.memo:
                stack.pop()
                continue
            plan = self._plan(cur)
            if plan is None:
                stack.pop()
                continue
            missing = [b for _, b in plan[1] if b not in self.memo]
            if missing:
                stack.extend(missing)
                continue
            stack.pop()
            self._combine(cur, plan)
        return self.memo[beta]

    def _plan(self, beta: Vec):
        R = self.R
        if beta in self.index:
            e = [R.zero] * len(self.basis)
            e[self.index[beta]] = R.one
            self.memo[beta] = (R.one, e)
            return None
        for i, (b, d) in enumerate(zip(beta, self.d)):
            if d == 0:
                base = beta
                s = R.sigma_many(self.p[i], base)
                self.memo[beta] = (s[0], [R.zero] * len(self.basis))
                return None
            if b >= d:
                base = tuple(x - (d if j == i else 0) for j, x in enumerate(beta))
                s = R.sigma_many(self.p[i], base)
                lead = s[d]
                rest = [(s[j], _shifted(base, i, j)) for j in range(d) if not s[j].is_zero()]
                return lead, rest
            if b < 0:
                s = R.sigma_many(self.p[i], beta)
                lead = s[0]
                rest = [(s[j], _shifted(beta, i, j)) for j in range(1, d + 1) if not s[j].is_zero()]
                return lead, rest
        raise AssertionError("unreachable: point inside the box")

    def _combine(self, beta: Vec, plan):
        R = self.R
        lead, rest = plan
        if not rest:
            self.memo[beta] = (lead, [R.zero] * len(self.basis))
            return
        cl = R.one
        for _, b in rest:
            cl = _lcm(cl, self.memo[b][0])
        B = [R.zero] * len(self.basis)
        for coeff, b in rest:
            cb, Bb = self.memo[b]
            m = coeff * (cl / cb)
            for k, x in enumerate(Bb):
                if not x.is_zero():
                    B[k] = B[k] - m * x
        self.memo[beta] = _unit_reduce(R, lead * cl, B)


def _shifted(beta: Vec, i: int, j: int) -> Vec:
    return tuple(x + (j if k == i else 0) for k, x in enumerate(beta))


def _box(d: Seq[int]) -> list[Vec]:
    if any(x == 0 for x in d):
        return []
    out = [()]
    for x in d:
        out = [p + (k,) for p in out for k in range(x)]
    return out


def _substitute(R: PolyRing, S: PolyRing, terms: dict[int, object], A, b: Seq[int], j: int) -> dict:
    """Map ``M_i -> q^{b_i} prod_j M'_j^{A_ij}`` and ``L^{tv} -> L'_j^t``."""
    r, s = R.rank, S.rank
    raw: dict[Vec, dict] = {}
    for t, poly in terms.items():
        beta = tuple(t if k == j else 0 for k in range(s))
        bucket = raw.setdefault(beta, {})
        for e, v in poly.to_dict().items():
            m = e[R.m0:]
            qe = e[0] + sum(b[i] * m[i] for i in range(r))
            new_m = [sum(A[i][k] * m[i] for i in range(r)) for k in range(s)]
            key = (qe,) + tuple(e[1:R.m0]) + tuple(new_m)
            bucket[key] = bucket.get(key, 0) + int(v)
    return S._normalize_dicts(raw)


def _line_terms(terms: dict[Vec, object], v: Vec):
    """If the L-support lies on a line parallel to ``v`` return ``(base, {t: p})``."""
    if not any(v):
        return None
    pts = list(terms)
    base = pts[0]
    k = next(i for i, x in enumerate(v) if x)
    steps = {}
    for beta in pts:
        diff = [x - y for x, y in zip(beta, base)]
        if diff[k] % v[k]:
            return None
        t = diff[k] // v[k]
        if any(dx != t * vx for dx, vx in zip(diff, v)):
            return None
        steps[t] = terms[beta]
    low = min(steps)
    start = tuple(x + low * vx for x, vx in zip(base, v))
    return start, {t - low: p for t, p in steps.items()}


def _finish(S: PolyRing, mapped: dict[Vec, object], j: int) -> WeylOperator | None:
    if not mapped:
        return None
    high = max(beta[j] for beta in mapped)
    coeffs = [mapped.get(tuple(t if k == j else 0 for k in range(S.rank)), S.zero) for t in range(high + 1)]
    # drop the leading zero block so the operator starts at L'^0
    low = next(t for t, c in enumerate(coeffs) if not c.is_zero())
    coeffs = coeffs[low:]
    return _assemble(S, j, coeffs)


def closure_affine(fsys: AnnihilatorSystem, A: Seq[Seq[int]], b: Seq[int] | None = None) -> AnnihilatorSystem:
    """Annihilators for ``g(m) = f(A m + b)`` with ``A`` an integer ``r x s`` matrix.

    For each new direction ``j`` an operator of ``f`` whose shifts lie on
    the line spanned by ``v = A e_j`` is transported directly when one
    exists; otherwise powers of ``L^v`` are reduced to the box basis of the
    rectangular system and the first dependence is transported.
    """
    r = fsys.rank
    A = [list(map(int, row)) for row in A]
    if len(A) != r:
        raise ClosureError(f"matrix has {len(A)} rows, expected {r}")
    s = len(A[0]) if A else 0
    if any(len(row) != s for row in A):
        raise ClosureError("ragged matrix")
    b = tuple(int(x) for x in (b if b is not None else [0] * r))
    if len(b) != r:
        raise ClosureError("translation vector has the wrong length")
    R = _ring_for(fsys)
    S = PolyRing(s, R.params)
    op_terms = [R.from_operator(P) for P in fsys.operators()]
    reducer = None
    directions = {}
    for j in range(s):
        v = tuple(A[i][j] for i in range(r))
        if not any(v):
            directions[j] = WeylOperator.L(j, s) - 1
            continue
        candidates = []
        for terms in op_terms:
            line = _line_terms(terms, v)
            if line is None:
                continue
            start, by_t = line
            shifted_b = tuple(x - y for x, y in zip(b, start))
            op = _finish(S, _substitute(R, S, by_t, A, shifted_b, j), j)
            if op is not None:
                candidates.append(op)
        if candidates:
            directions[j] = min(candidates, key=lambda P: (P.l_degree(j), len(P), str(P)))
            continue
        if not fsys.is_rectangular():
            raise ClosureError(f"direction {j}: no operator along {v} and the system is not rectangular")
        if reducer is None:
            polys = [direction_polys(R, fsys.direction(i), i) for i in range(r)]
            reducer = _BoxReducer(R, polys)
        C: list = []

        def vectors():
            t = 0
            while True:
                c, B = reducer.reduce(tuple(t * x for x in v))
                C.append(c)
                yield B
                t += 1
                if t > len(reducer.basis) + 1:
                    return

        lam = first_dependence(R, vectors())
        if lam is None:
            raise ClosureError("internal error: no dependence in the box basis")
        by_t = {t: l * c for t, (l, c) in enumerate(zip(lam, C)) if not (l * c).is_zero()}
        op = _finish(S, _substitute(R, S, by_t, A, b, j), j)
        if op is None:
            raise DegenerateStratumError(
                f"direction {j}: every coefficient vanishes on the substituted stratum; "
                "use the guess module for this sequence"
            )
        directions[j] = op
    return AnnihilatorSystem.make(s, directions, note=f"affine image under A={A}, b={list(b)}")


# -- sequence-level wrappers ----------------------------------------------------


def _window(rank: int, window) -> tuple:
    if window is None:
        return (DEFAULT_CLOSURE_WINDOW,) * rank
    if isinstance(window[0], int):
        return (tuple(window),) * rank
    return tuple(tuple(w) for w in window)


def _shared_directions(f: Sequence, g: Sequence) -> list[int]:
    if f.system is None or g.system is None:
        raise ClosureError("both sequences need attached annihilator systems")
    return [i for i in range(f.rank) if f.system.has_direction(i) and g.system.has_direction(i)]


def closed_sum(f: Sequence, g: Sequence, window=None) -> Sequence:
    """``f + g`` with a window-verified system from :func:`closure_sum`."""
    dirs = {i: closure_sum(f.system, g.system, i) for i in _shared_directions(f, g)}
    sys = AnnihilatorSystem.make(f.rank, dirs, note=f"sum of {f.label} and {g.label}")
    h = seq_add(f, g)
    return h.with_system(sys.verify(h, _window(f.rank, window)))


def closed_mul(f: Sequence, g: Sequence, window=None) -> Sequence:
    """``f * g`` with a window-verified system from :func:`closure_mul`."""
    dirs = {i: closure_mul(f.system, g.system, i) for i in _shared_directions(f, g)}
    sys = AnnihilatorSystem.make(f.rank, dirs, note=f"product of {f.label} and {g.label}")
    h = seq_mul(f, g)
    return h.with_system(sys.verify(h, _window(f.rank, window)))


def closed_affine(f: Sequence, A, b=None, names=None, window=None) -> Sequence:
    """``m -> f(A m + b)`` with a window-verified system from :func:`closure_affine`."""
    if f.system is None:
        raise ClosureError("the sequence needs an attached annihilator system")
    sys = closure_affine(f.system, A, b)
    g = seq_affine(f, A, b, names)
    return g.with_system(sys.verify(g, _window(g.rank, window)))
