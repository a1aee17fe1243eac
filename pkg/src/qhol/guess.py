"""Recurrence guessing: ansatz, modular nullspace, exact verification.

An operator ansatz is a sum of monomials ``q^e x^g M^alpha L^beta`` with
unknown rational coefficients, restricted to a generator subset (the
variables whose ``M`` and ``L`` may appear) and to bounds on the shift
order, the ``M``-degree, the ``q``-degree and the parameter degree.
Window points and modular specializations give linear equations; the
rational nullspace (see :mod:`qhol.modsolve`) is turned into a basis over
``Q(q, params)`` in reduced echelon form, content-reduced and verified
exactly on a strictly larger window.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence as Seq

from .closure import positive_first
from .modsolve import ModularNullspace
from .scalar import ONE, ZERO, Scalar
from .sequence import Sequence
from .system import WINDOW_VERIFIED, AnnihilatorSystem, VerificationError, box_points, verify_operator
from .weyl import WeylOperator

__all__ = [
    "GuessConfig",
    "GuessError",
    "guess_annihilator",
    "guess_system",
    "parse_gens",
    "ansatz_monomials",
]

Box = tuple[tuple[int, int], ...]


class GuessError(ValueError):
    """Bad configuration, or a direction without any operator in bounds."""


def parse_gens(text: str, names: Seq[str]) -> tuple[frozenset, frozenset]:
    """``"Mn,Lk,Ln"`` -> (M indices, L indices) using the variable names."""
    m, l = set(), set()
    for tok in (t.strip() for t in text.split(",")):
        if not tok:
            continue
        kind, var = tok[0], tok[1:]
        if kind not in "ML":
            raise GuessError(f"generator {tok!r} must start with M or L")
        if var in names:
            idx = list(names).index(var)
        elif var.isdigit() and 1 <= int(var) <= len(names):
            idx = int(var) - 1
        else:
            raise GuessError(f"unknown variable in generator {tok!r}")
        (m if kind == "M" else l).add(idx)
    return frozenset(m), frozenset(l)


@dataclass(frozen=True)
class GuessConfig:
    """Ansatz bounds and windows.

    ``m_vars``/``l_vars`` select the generators (``None`` means all).
    ``window``/``verify_window`` default to the box rule of
    :meth:`resolved`; the verification window must strictly contain the
    evaluation window.
    """

    order: int = 1
    mdeg: int = 2
    qdeg: int = 2
    pdeg: int = 1
    m_vars: frozenset | None = None
    l_vars: frozenset | None = None
    window: Box | None = None
    verify_window: Box | None = None
    seed: int = 0

    def __post_init__(self):
        if min(self.order, self.mdeg, self.qdeg, self.pdeg) < 0:
            raise GuessError("guess bounds must be non-negative")
        for name in ("m_vars", "l_vars"):
            v = getattr(self, name)
            if v is not None:
                object.__setattr__(self, name, frozenset(int(i) for i in v))

    def generators(self, rank: int) -> tuple[tuple[int, ...], tuple[int, ...]]:
        m = tuple(sorted(self.m_vars)) if self.m_vars is not None else tuple(range(rank))
        l = tuple(sorted(self.l_vars)) if self.l_vars is not None else tuple(range(rank))
        if any(not 0 <= i < rank for i in m + l):
            raise GuessError("generator index out of range")
        return m, l

    def with_gens(self, m_vars: Iterable[int], l_vars: Iterable[int]) -> "GuessConfig":
        return _replace(self, m_vars=frozenset(m_vars), l_vars=frozenset(l_vars))

    def resolved(self, f: Sequence) -> tuple[Box, Box]:
        r = f.rank
        m, l = self.generators(r)
        u = 1
        for i in range(r):
            u = max(u, (self.order + 1 if i in l else 1) * (self.mdeg + 1 if i in m else 1))
        ev = self.window or ((0, 2 * u + 4),) * r
        if self.verify_window is not None:
            ver = self.verify_window
        else:
            lo = 0 if f.domain_convention == "N" else -4
            ver = tuple((min(lo, a), b + 4) for a, b in ev)
        if len(ev) != r or len(ver) != r:
            raise GuessError("window rank does not match the sequence")
        contains = all(va <= a and b <= vb for (a, b), (va, vb) in zip(ev, ver))
        if not contains or tuple(ev) == tuple(ver):
            raise GuessError("the verification window must strictly contain the evaluation window")
        return tuple(ev), tuple(ver)


def _replace(cfg: GuessConfig, **changes) -> GuessConfig:
    from dataclasses import replace

    return replace(cfg, **changes)


def ansatz_monomials(rank: int, cfg: GuessConfig) -> list[tuple[tuple[int, ...], tuple[int, ...]]]:
    """Operator monomials ``(alpha, beta)``, highest first in the basis order."""
    m, l = cfg.generators(rank)
    alphas = []
    for exps in itertools.product(range(cfg.mdeg + 1), repeat=len(m)):
        if sum(exps) <= cfg.mdeg:
            a = [0] * rank
            for i, e in zip(m, exps):
                a[i] = e
            alphas.append(tuple(a))
    betas = []
    for exps in itertools.product(range(cfg.order + 1), repeat=len(l)):
        b = [0] * rank
        for i, e in zip(l, exps):
            b[i] = e
        betas.append(tuple(b))
    monos = [(a, b) for b in betas for a in alphas]
    monos.sort(key=_mono_key, reverse=True)
    return monos


def _mono_key(mono):
    a, b = mono
    return (sum(b), sum(a) + sum(b), b, a)


def _coeff_monomials(params: tuple[str, ...], cfg: GuessConfig) -> list[tuple[int, tuple[int, ...]]]:
    out = []
    for e in range(cfg.qdeg, -1, -1):
        for g in itertools.product(range(cfg.pdeg, -1, -1), repeat=len(params)):
            out.append((e, g))
    return out


def _scalar_of(params, e: int, g: tuple[int, ...], v: Fraction) -> Scalar:
    s = Scalar.from_fraction(v) * Scalar.qpow(e)
    for name, k in zip(params, g):
        if k:
            s = s * Scalar.param(name) ** k
    return s


def _kq_basis(vectors: list[list[Scalar]]) -> list[list[Scalar]]:
    """Reduced echelon basis over the coefficient field, rows cleared to polynomials."""
    rows: list[list[Scalar]] = []
    pivots: list[int] = []
    for v in vectors:
        w = list(v)
        for p, row in zip(pivots, rows):
            if not w[p].is_zero():
                c = w[p]
                w = [x - c * y for x, y in zip(w, row)]
        piv = next((j for j, x in enumerate(w) if not x.is_zero()), None)
        if piv is None:
            continue
        inv = w[piv].inverse()
        w = [x * inv for x in w]
        for idx, row in enumerate(rows):
            if not row[piv].is_zero():
                c = row[piv]
                rows[idx] = [x - c * y for x, y in zip(row, w)]
        rows.append(w)
        pivots.append(piv)
    return rows


def _clear(row: list[Scalar]) -> list[Scalar]:
    """Multiply by the lcm of denominators, divide by the numerator gcd."""
    den = None
    for x in row:
        if x.is_zero():
            continue
        d = Scalar(x.denominator)
        den = d if den is None else den * d / _gcd_scalar(den, d)
    row = [x * den for x in row] if den is not None else row
    g = None
    for x in row:
        if x.is_zero():
            continue
        n = Scalar(x.numerator)
        g = n if g is None else _gcd_scalar(g, n)
    if g is not None and not g.is_one():
        row = [x / g for x in row]
    return row


def _gcd_scalar(a: Scalar, b: Scalar) -> Scalar:
    from .scalar import _lift, _merge, _params_of

    params = _merge(a.params, b.params)
    na, nb = _lift(a.numerator, params), _lift(b.numerator, params)
    return Scalar(na.gcd(nb))


def _operator_from_row(rank: int, monos, row: list[Scalar]) -> WeylOperator:
    return positive_first(WeylOperator(rank, {m: c for m, c in zip(monos, row) if not c.is_zero()}))


def _sort_key(P: WeylOperator):
    lo = max((sum(b) for (_, b), _ in P.items()), default=0)
    deg = max((sum(a) + sum(b) for (a, b), _ in P.items()), default=0)
    return (lo, deg, P.to_str())


def _solve(f: Sequence, cfg: GuessConfig, monos, cmonos, params, points: list) -> list[list[Fraction]] | None:
    nm = len(monos)
    ncols = nm * len(cmonos)
    per_batch = min(len(points), 3 * nm + 12)

    def batch(dom, _state={"k": 0}):
        p = dom.p
        q0 = dom.q0
        pv = [int(dom.param(n)) for n in params]
        cvals = []
        for e, g in cmonos:
            v = pow(q0, e, p)
            for base, k in zip(pv, g):
                v = v * pow(base, k, p) % p
            cvals.append(v)
        start = (_state["k"] * per_batch) % len(points)
        _state["k"] += 1
        chosen = [points[(start + i) % len(points)] for i in range(per_batch)]
        rows = []
        for n in chosen:
            fv = {}
            row = []
            for a, b in monos:
                if b not in fv:
                    fv[b] = int(f.eval(tuple(x + y for x, y in zip(n, b)), dom))
                mv = pow(q0, sum(x * y for x, y in zip(a, n)), p) * fv[b] % p
                row.extend(mv * c % p for c in cvals)
            rows.append(row)
        return rows

    solver = ModularNullspace(ncols, batch, params=params, seed=cfg.seed, min_batches=len(cmonos) + 1)
    result = solver.solve(lambda im: list(range(im.dimension)), lambda rows: True)
    return result


def guess_annihilator(f: Sequence, cfg: GuessConfig | None = None) -> list[WeylOperator]:
    """A basis of operators in the ansatz that annihilate ``f`` on the verification window.

    The basis is in reduced echelon form over ``Q(q, params)`` with respect
    to the monomial order (shift order, total degree, lexicographic),
    each element content-reduced with polynomial coefficients and sorted
    by that order.  An empty list means nothing within the bounds.
    """
    cfg = cfg or GuessConfig()
    ev, ver = cfg.resolved(f)
    monos = ansatz_monomials(f.rank, cfg)
    params = tuple(sorted(f.params))
    cmonos = _coeff_monomials(params, cfg)
    ev_points = list(box_points(ev))
    if len(ev_points) < len(monos):
        raise GuessError(
            f"evaluation window has {len(ev_points)} points but the ansatz has {len(monos)} operator monomials"
        )
    # points whose shifts stay inside the domain convention
    ev_points = [n for n in ev_points if _admissible(f, n)]
    ops = _basis_from_points(f, cfg, monos, cmonos, params, ev_points)
    good, bad = _split_verified(ops, f, ver)
    if bad:
        # the evaluation window admitted spurious solutions; impose the larger window as well
        all_points = [n for n in box_points(ver) if _admissible(f, n)]
        ops = _basis_from_points(f, cfg, monos, cmonos, params, all_points)
        good, _ = _split_verified(ops, f, ver)
    return _generators(sorted(good, key=_sort_key), monos)


def _generators(ops: list[WeylOperator], monos) -> list[WeylOperator]:
    """Drop operators lying in the span of left ``M``-multiples of earlier ones."""
    index = {m: k for k, m in enumerate(monos)}
    rows: list[list[Scalar]] = []
    kept = []

    def vec(P):
        v = [ZERO] * len(monos)
        for key, c in P.items():
            if key not in index:
                return None
            v[index[key]] = c
        return v

    for P in ops:
        v = vec(P)
        if v is not None and len(_kq_basis(rows + [v])) == len(rows):
            continue
        kept.append(P)
        rank = P.rank
        for a, _b in monos:
            shifted = WeylOperator(rank, {((tuple(x + y for x, y in zip(a, al))), be): c for (al, be), c in P.items()})
            w = vec(shifted)
            if w is not None:
                rows.append(w)
        rows = _kq_basis(rows)
    return kept


def _admissible(f: Sequence, n) -> bool:
    return f.domain_convention != "N" or all(x >= 0 for x in n)


def _basis_from_points(f, cfg, monos, cmonos, params, points) -> list[WeylOperator]:
    rows = _solve(f, cfg, monos, cmonos, params, points)
    if not rows:
        return []
    nc = len(cmonos)
    vectors = []
    for row in rows:
        vec = []
        for k in range(len(monos)):
            s = ZERO
            for (e, g), v in zip(cmonos, row[k * nc:(k + 1) * nc]):
                if v:
                    s = s + _scalar_of(params, e, g, v)
            vec.append(s)
        vectors.append(vec)
    basis = _kq_basis(vectors)
    return [_operator_from_row(f.rank, monos, _clear(r)) for r in basis]


def _split_verified(ops, f, box):
    good, bad = [], []
    for P in ops:
        try:
            verify_operator(P, f, box)
            good.append(P)
        except VerificationError:
            bad.append(P)
    return good, bad


def guess_system(f: Sequence, cfg: GuessConfig | None = None) -> AnnihilatorSystem:
    """One guessed operator per direction, assembled into a verified system."""
    cfg = cfg or GuessConfig()
    _, ver = cfg.resolved(f)
    dirs = {}
    failed = []
    for i in range(f.rank):
        sub = cfg.with_gens(range(f.rank), [i])
        found = guess_annihilator(f, sub)
        if found:
            dirs[i] = found[0]
        else:
            failed.append(i)
    if failed:
        names = ", ".join(f.names[i] for i in failed)
        raise GuessError(
            f"no operator in direction(s) {names} within order {cfg.order}, "
            f"M-degree {cfg.mdeg}, q-degree {cfg.qdeg}"
        )
    sys = AnnihilatorSystem.make(f.rank, dirs, note=f"guessed for {f.label}")
    from dataclasses import replace

    return replace(sys, status=WINDOW_VERIFIED, window=ver)
