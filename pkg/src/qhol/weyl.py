"""The quantum Weyl algebra in ``r`` variables.

Operators are finite sums ``c * M^alpha * L^beta`` with Scalar coefficients,
stored normal ordered (all ``M`` to the left of all ``L``).  The only
relation is ``L_i M_j = q^{[i=j]} M_j L_i``, so

    (c1 M^a1 L^b1) (c2 M^a2 L^b2) = c1 c2 q^{b1.a2} M^{a1+a2} L^{b1+b2}.

Exponents may be negative; the "plus" subalgebra is a predicate.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Sequence as Seq

from .domains import EXACT
from .scalar import ONE, ZERO, Scalar, ScalarLike, _ctx, _lift, as_scalar
from .textparse import ParseError, int_exponent, parse_arith

__all__ = [
    "WeylOperator",
    "SymplecticMatrix",
    "weyl_mul",
    "weyl_add",
    "weyl_scale",
    "weyl_apply",
    "weyl_symplectic",
    "weyl_zero_extension_multiplier",
    "parse_operator",
    "mellin_matrix",
]

Vec = tuple[int, ...]
Key = tuple[Vec, Vec]


def _dot(a: Seq[int], b: Seq[int]) -> int:
    return sum(x * y for x, y in zip(a, b))


def _addv(a: Seq[int], b: Seq[int]) -> Vec:
    return tuple(x + y for x, y in zip(a, b))


class WeylOperator:
    """A normal-ordered element of the quantum Weyl algebra ``T_r``."""

    __slots__ = ("rank", "_terms", "_hash", "_groups")

    def __init__(self, rank: int, terms: Mapping[Key, ScalarLike] | None = None):
        self.rank = int(rank)
        clean: dict[Key, Scalar] = {}
        for (alpha, beta), c in (terms or {}).items():
            alpha, beta = tuple(int(a) for a in alpha), tuple(int(b) for b in beta)
            if len(alpha) != self.rank or len(beta) != self.rank:
                raise ValueError(f"monomial {(alpha, beta)} does not have rank {self.rank}")
            c = as_scalar(c)
            if c.is_zero():
                continue
            key = (alpha, beta)
            if key in clean:
                c = clean[key] + c
                if c.is_zero():
                    del clean[key]
                    continue
            clean[key] = c
        self._terms = clean
        self._hash = None
        self._groups = None

    # -- constructors -------------------------------------------------
    @classmethod
    def zero(cls, rank: int) -> "WeylOperator":
        return cls(rank)

    @classmethod
    def one(cls, rank: int) -> "WeylOperator":
        return cls.scalar(rank, ONE)

    @classmethod
    def scalar(cls, rank: int, c: ScalarLike) -> "WeylOperator":
        z = (0,) * rank
        return cls(rank, {(z, z): c})

    @classmethod
    def monomial(cls, alpha: Seq[int], beta: Seq[int], c: ScalarLike = 1) -> "WeylOperator":
        return cls(len(alpha), {(tuple(alpha), tuple(beta)): c})

    @classmethod
    def M(cls, i: int = 0, rank: int = 1, power: int = 1) -> "WeylOperator":
        a = [0] * rank
        a[i] = power
        return cls.monomial(a, [0] * rank)

    @classmethod
    def L(cls, i: int = 0, rank: int = 1, power: int = 1) -> "WeylOperator":
        b = [0] * rank
        b[i] = power
        return cls.monomial([0] * rank, b)

    # -- accessors ----------------------------------------------------
    @property
    def terms(self) -> dict[Key, Scalar]:
        return dict(self._terms)

    def items(self):
        return self._terms.items()

    def is_zero(self) -> bool:
        return not self._terms

    def __bool__(self) -> bool:
        return bool(self._terms)

    def __len__(self) -> int:
        return len(self._terms)

    def is_plus(self) -> bool:
        return all(min(a + b, default=0) >= 0 for a, b in self._terms)

    def degree(self) -> int:
        """Total filtration degree ``max |alpha| + |beta|`` (plus operators)."""
        return max((sum(a) + sum(b) for a, b in self._terms), default=-1)

    def l_support(self) -> list[Vec]:
        return sorted({b for _, b in self._terms})

    def l_degree(self, i: int) -> int:
        """Spread of the ``L_i`` exponents (order in direction ``i``)."""
        es = [b[i] for _, b in self._terms]
        return max(es) - min(es) if es else -1

    def uses_only(self, m_vars: Iterable[int], l_vars: Iterable[int]) -> bool:
        m_ok, l_ok = set(m_vars), set(l_vars)
        for a, b in self._terms:
            if any(e and i not in m_ok for i, e in enumerate(a)):
                return False
            if any(e and i not in l_ok for i, e in enumerate(b)):
                return False
        return True

    def coefficient(self, alpha: Seq[int], beta: Seq[int]) -> Scalar:
        return self._terms.get((tuple(alpha), tuple(beta)), ZERO)

    def params(self) -> tuple[str, ...]:
        names: set[str] = set()
        for c in self._terms.values():
            names.update(c.params)
        return tuple(sorted(names))

    # -- ring structure -----------------------------------------------
    def _check(self, other: "WeylOperator"):
        if not isinstance(other, WeylOperator):
            raise TypeError("expected a WeylOperator")
        if other.rank != self.rank:
            raise ValueError(f"rank mismatch: {self.rank} vs {other.rank}")

    def _coerce(self, other) -> "WeylOperator":
        if isinstance(other, WeylOperator):
            self._check(other)
            return other
        return WeylOperator.scalar(self.rank, as_scalar(other))

    def __add__(self, other) -> "WeylOperator":
        other = self._coerce(other)
        terms = dict(self._terms)
        for k, c in other._terms.items():
            terms[k] = terms[k] + c if k in terms else c
        return WeylOperator(self.rank, terms)

    __radd__ = __add__

    def __neg__(self) -> "WeylOperator":
        return WeylOperator(self.rank, {k: -c for k, c in self._terms.items()})

    def __sub__(self, other) -> "WeylOperator":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "WeylOperator":
        return self._coerce(other) - self

    def __mul__(self, other) -> "WeylOperator":
        if not isinstance(other, WeylOperator):
            c = as_scalar(other)
            return WeylOperator(self.rank, {k: v * c for k, v in self._terms.items()})
        self._check(other)
        acc: dict[Key, Scalar] = {}
        for (a1, b1), c1 in self._terms.items():
            for (a2, b2), c2 in other._terms.items():
                key = (_addv(a1, a2), _addv(b1, b2))
                c = c1 * c2
                e = _dot(b1, a2)
                if e:
                    c = c * Scalar.qpow(e)
                acc[key] = acc[key] + c if key in acc else c
        return WeylOperator(self.rank, acc)

    def __rmul__(self, other) -> "WeylOperator":
        # scalars are central
        c = as_scalar(other)
        return WeylOperator(self.rank, {k: c * v for k, v in self._terms.items()})

    def __pow__(self, e: int) -> "WeylOperator":
        e = int(e)
        if e < 0:
            if len(self._terms) != 1:
                raise ValueError("only monomials can be inverted")
            return self.monomial_inverse() ** (-e)
        result = WeylOperator.one(self.rank)
        base = self
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    def monomial_inverse(self) -> "WeylOperator":
        """Inverse of ``c M^a L^b``, namely ``c^-1 q^{a.b} M^-a L^-b``."""
        if len(self._terms) != 1:
            raise ValueError("only monomials can be inverted")
        ((a, b), c), = self._terms.items()
        neg = lambda v: tuple(-x for x in v)  # noqa: E731
        return WeylOperator(self.rank, {(neg(a), neg(b)): c.inverse() * Scalar.qpow(_dot(a, b))})

    def shift_coefficients(self, shift: Seq[int]) -> "WeylOperator":
        """Conjugate by ``L^shift``: ``L^s P L^-s``, i.e. ``M_i -> q^{s_i} M_i``."""
        return WeylOperator(
            self.rank,
            {(a, b): c * Scalar.qpow(_dot(a, shift)) for (a, b), c in self._terms.items()},
        )

    def normalize_l(self) -> "WeylOperator":
        """Left-multiply by ``L^-m`` so that the smallest ``L`` exponents are 0."""
        if not self._terms:
            return self
        low = tuple(min(b[i] for _, b in self._terms) for i in range(self.rank))
        if not any(low):
            return self
        neg = tuple(-x for x in low)
        return WeylOperator.monomial((0,) * self.rank, neg) * self

    # -- equality -----------------------------------------------------
    def __eq__(self, other) -> bool:
        if not isinstance(other, WeylOperator):
            return NotImplemented
        return self.rank == other.rank and self._terms == other._terms

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.rank, frozenset(self._terms.items())))
        return self._hash

    # -- action -------------------------------------------------------
    def apply(self, f, n: Seq[int], domain=EXACT):
        return weyl_apply(self, f, n, domain)

    def prepared(self, domain=EXACT) -> list[tuple[Vec, Vec, object]]:
        """Terms with coefficients coerced into ``domain`` (for repeated use)."""
        return [(a, b, domain.coerce(c)) for (a, b), c in self._terms.items()]

    # -- text ---------------------------------------------------------
    def sorted_terms(self) -> list[tuple[Key, Scalar]]:
        def key(item):
            (a, b), _ = item
            return (-sum(b), tuple(-x for x in b), sum(a), a)

        return sorted(self._terms.items(), key=key)

    def to_str(self, names: Seq[str] | None = None) -> str:
        if not self._terms:
            return "0"
        mnames, lnames = _gen_names(self.rank, names)
        parts: list[str] = []
        for (a, b), c in self.sorted_terms():
            mono = []
            for i, e in enumerate(a):
                if e:
                    mono.append(mnames[i] if e == 1 else f"{mnames[i]}^{e}")
            for i, e in enumerate(b):
                if e:
                    mono.append(lnames[i] if e == 1 else f"{lnames[i]}^{e}")
            sign, text = _coeff_text(c, bool(mono))
            body = "*".join(([text] if text else []) + mono)
            parts.append((sign, body))
        out = ("-" if parts[0][0] < 0 else "") + parts[0][1]
        for sign, body in parts[1:]:
            out += (" - " if sign < 0 else " + ") + body
        return out

    def __str__(self) -> str:
        return self.to_str()

    def __repr__(self) -> str:
        return f"WeylOperator({self.to_str()!r})"


def _gen_names(rank: int, names: Seq[str] | None) -> tuple[list[str], list[str]]:
    if names is not None:
        if len(names) != rank:
            raise ValueError(f"expected {rank} variable names")
        return [f"M{n}" for n in names], [f"L{n}" for n in names]
    if rank == 1:
        return ["M"], ["L"]
    return [f"M{i + 1}" for i in range(rank)], [f"L{i + 1}" for i in range(rank)]


def _coeff_text(c: Scalar, has_mono: bool) -> tuple[int, str]:
    """Return (sign, text) with ``text`` safe to juxtapose with ``*``."""
    sign = 1
    if len(c.numerator.to_dict()) == 1 and c.numerator.leading_coefficient() < 0:
        sign, c = -1, -c
    if c.is_one():
        return sign, "" if has_mono else "1"
    s = str(c)
    if len(c.numerator.to_dict()) > 1 or not c.denominator.is_one():
        if not (s.startswith("(") and s.endswith(")") and c.denominator.is_one()):
            s = f"({s})"
    return sign, s


# -- module level operations ------------------------------------------------


def weyl_mul(P: WeylOperator, Q: WeylOperator) -> WeylOperator:
    return P * Q


def weyl_add(P: WeylOperator, Q: WeylOperator) -> WeylOperator:
    return P + Q


def weyl_scale(P: WeylOperator, c: ScalarLike) -> WeylOperator:
    return P * as_scalar(c)


def _evaluator(f) -> Callable:
    if hasattr(f, "eval"):
        return f.eval
    return lambda n, domain=EXACT: f(n)


def weyl_apply(P: WeylOperator, f, n: Seq[int], domain=EXACT):
    """``(P f)(n) = sum c q^{<alpha, n>} f(n + beta)``."""
    n = tuple(int(v) for v in n)
    if len(n) != P.rank:
        raise ValueError(f"point {n} does not have rank {P.rank}")
    ev = _evaluator(f)
    total = domain.zero
    if domain.exact:
        groups = _exact_groups(P)
        if groups is not None:
            for b, (ctx, terms) in groups.items():
                val = ev(_addv(n, b), domain)
                if domain.is_zero(val):
                    continue
                total = total + _group_value(ctx, terms, n) * val
            return total
    for (a, b), c in P.items():
        val = ev(_addv(n, b), domain)
        if domain.is_zero(val):
            continue
        total = total + domain.coerce(c) * domain.qpow(_dot(a, n)) * val
    return total


def _exact_groups(P: WeylOperator):
    """Terms grouped by shift, as integer exponent data over one context.

    ``None`` when some coefficient has a nontrivial denominator; the
    generic Scalar path handles that case.
    """
    if P._groups is None:
        groups: dict = {}
        if all(c.denominator.is_one() for _, c in P.items()):
            params: set = set()
            for _, c in P.items():
                params.update(c.params)
            ctx = _ctx(tuple(sorted(params)))
            for (a, b), c in P.items():
                entry = groups.setdefault(b, (ctx, []))
                num = _lift(c.numerator, tuple(sorted(params)))
                entry[1].append((a, [(tuple(int(x) for x in e), int(v)) for e, v in num.to_dict().items()]))
        else:
            groups = False
        P._groups = groups
    return P._groups or None


def _group_value(ctx, terms, n: Vec) -> Scalar:
    """``sum_alpha c_alpha q^{alpha . n}`` as one Scalar."""
    acc: dict = {}
    for a, data in terms:
        shift = _dot(a, n)
        for e, v in data:
            key = (e[0] + shift,) + e[1:]
            acc[key] = acc.get(key, 0) + v
    acc = {k: v for k, v in acc.items() if v}
    if not acc:
        return ZERO
    low = min(k[0] for k in acc)
    if low < 0:
        acc = {(k[0] - low,) + k[1:]: v for k, v in acc.items()}
    num = ctx.from_dict(acc)
    if low < 0:
        return Scalar(num, ctx.from_dict({(-low,) + (0,) * (ctx.nvars() - 1): 1}))
    return Scalar(num)


# -- symplectic automorphisms ---------------------------------------------


@dataclass(frozen=True)
class SymplecticMatrix:
    """Blocks of ``X = [[A, B], [C, D]]``; validated against ``X^T J X = J``."""

    A: tuple[tuple[int, ...], ...]
    B: tuple[tuple[int, ...], ...]
    C: tuple[tuple[int, ...], ...]
    D: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        for name in "ABCD":
            block = tuple(tuple(int(v) for v in row) for row in getattr(self, name))
            object.__setattr__(self, name, block)
        r = len(self.A)
        if any(len(blk) != r or any(len(row) != r for row in blk) for blk in (self.A, self.B, self.C, self.D)):
            raise ValueError("blocks must all be r x r")
        if not self.is_symplectic():
            raise ValueError("matrix is not symplectic")

    @property
    def rank(self) -> int:
        return len(self.A)

    @classmethod
    def from_full(cls, X: Seq[Seq[int]]) -> "SymplecticMatrix":
        n = len(X)
        if n % 2:
            raise ValueError("symplectic matrices have even size")
        r = n // 2
        A = tuple(tuple(X[i][:r]) for i in range(r))
        B = tuple(tuple(X[i][r:]) for i in range(r))
        C = tuple(tuple(X[i][:r]) for i in range(r, n))
        D = tuple(tuple(X[i][r:]) for i in range(r, n))
        return cls(A, B, C, D)

    def full(self) -> list[list[int]]:
        r = self.rank
        top = [list(self.A[i]) + list(self.B[i]) for i in range(r)]
        bot = [list(self.C[i]) + list(self.D[i]) for i in range(r)]
        return top + bot

    def is_symplectic(self) -> bool:
        X = self.full()
        n = len(X)
        r = n // 2
        J = [[0] * n for _ in range(n)]
        for i in range(r):
            J[i][r + i] = 1
            J[r + i][i] = -1
        XT = [list(col) for col in zip(*X)]
        return _matmul(_matmul(XT, J), X) == J

    def __matmul__(self, other: "SymplecticMatrix") -> "SymplecticMatrix":
        return SymplecticMatrix.from_full(_matmul(self.full(), other.full()))

    def apply_exponents(self, alpha: Seq[int], beta: Seq[int]) -> tuple[Vec, Vec]:
        """``(alpha, beta) -> (A alpha + B beta, C alpha + D beta)``."""
        r = self.rank
        na = tuple(_dot(self.A[i], alpha) + _dot(self.B[i], beta) for i in range(r))
        nb = tuple(_dot(self.C[i], alpha) + _dot(self.D[i], beta) for i in range(r))
        return na, nb

    @classmethod
    def identity(cls, r: int) -> "SymplecticMatrix":
        eye = tuple(tuple(int(i == j) for j in range(r)) for i in range(r))
        zero = tuple((0,) * r for _ in range(r))
        return cls(eye, zero, zero, eye)


def _matmul(X, Y):
    return [[sum(X[i][k] * Y[k][j] for k in range(len(Y))) for j in range(len(Y[0]))] for i in range(len(X))]


def mellin_matrix(r: int) -> SymplecticMatrix:
    """``[[0, I], [-I, 0]]``: sends ``M_i -> L_i^{-1}`` and ``L_i -> M_i``."""
    eye = tuple(tuple(int(i == j) for j in range(r)) for i in range(r))
    neg = tuple(tuple(-int(i == j) for j in range(r)) for i in range(r))
    zero = tuple((0,) * r for _ in range(r))
    return SymplecticMatrix(zero, eye, neg, zero)


def weyl_symplectic(P: WeylOperator, X: SymplecticMatrix) -> WeylOperator:
    """Image of ``P`` under the automorphism attached to ``X``.

    Each generator goes to the normal-ordered monomial given by the exponent
    map; a monomial ``M^alpha L^beta`` goes to the ordered product of the
    generator images, so the only powers of ``q`` are those produced by
    normal ordering that product.
    """
    if not isinstance(X, SymplecticMatrix):
        raise TypeError("expected a SymplecticMatrix")
    if X.rank != P.rank:
        raise ValueError("rank mismatch")
    r = P.rank
    z = (0,) * r
    images_m, images_l = [], []
    for i in range(r):
        e = tuple(int(i == j) for j in range(r))
        images_m.append(WeylOperator(r, {X.apply_exponents(e, z): ONE}))
        images_l.append(WeylOperator(r, {X.apply_exponents(z, e): ONE}))
    out = WeylOperator.zero(r)
    for (a, b), c in P.items():
        term = WeylOperator.scalar(r, c)
        for i in range(r):
            if a[i]:
                term = term * images_m[i] ** a[i]
        for i in range(r):
            if b[i]:
                term = term * images_l[i] ** b[i]
        out = out + term
    return out


def weyl_zero_extension_multiplier(P: WeylOperator, d: int | None = None) -> WeylOperator:
    """``prod_{j=1..d} (1 - q^j M) * P`` for a one-variable plus operator."""
    if P.rank != 1:
        raise ValueError("zero extension multiplier is defined for rank 1")
    if not P.is_plus():
        raise ValueError("expected an operator with non-negative exponents")
    if d is None:
        d = max((b[0] for (_, b), _c in P.items()), default=0)
    out = P
    M = WeylOperator.M()
    for j in range(d, 0, -1):
        out = (WeylOperator.one(1) - M * Scalar.qpow(j)) * out
    return out


# -- parsing ----------------------------------------------------------------


def parse_operator(
    text: str,
    rank: int | None = None,
    names: Seq[str] | None = None,
    params: Iterable[str] | None = None,
) -> WeylOperator:
    """Parse operator text such as ``(1-q*M)*L - (1-q*M)^2``.

    Generators are ``M``/``L`` (rank 1), ``M1..Mr``/``L1..Lr``, or
    ``M<var>``/``L<var>`` when variable names are given.
    """
    tree = parse_arith(text)
    gens: dict[str, tuple[str, int]] = {}
    if names is not None:
        names = list(names)
        rank = len(names) if rank is None else rank
        for i, n in enumerate(names):
            gens[f"M{n}"] = ("M", i)
            gens[f"L{n}"] = ("L", i)
    if rank is None:
        rank = _infer_rank(tree)
    for i in range(rank):
        gens.setdefault(f"M{i + 1}", ("M", i))
        gens.setdefault(f"L{i + 1}", ("L", i))
    if rank == 1:
        gens.setdefault("M", ("M", 0))
        gens.setdefault("L", ("L", 0))
    allowed = None if params is None else set(params)

    def go(node) -> WeylOperator:
        kind = node[0]
        if kind == "num":
            return WeylOperator.scalar(rank, node[1])
        if kind == "name":
            name = node[1]
            if name in gens:
                which, i = gens[name]
                return WeylOperator.M(i, rank) if which == "M" else WeylOperator.L(i, rank)
            if name == "q":
                return WeylOperator.scalar(rank, Scalar.q())
            if allowed is not None and name not in allowed:
                raise ParseError(f"unknown generator or parameter {name!r}")
            if name[:1] in ("M", "L") and name[1:].isdigit():
                raise ParseError(f"generator {name!r} exceeds rank {rank}")
            return WeylOperator.scalar(rank, Scalar.param(name))
        if kind == "neg":
            return -go(node[1])
        if kind == "add":
            return go(node[1]) + go(node[2])
        if kind == "sub":
            return go(node[1]) - go(node[2])
        if kind == "mul":
            return go(node[1]) * go(node[2])
        if kind == "div":
            den = go(node[2])
            z = (0,) * rank
            if set(den.terms) - {(z, z)} or den.is_zero():
                raise ParseError("operators can only be divided by nonzero scalars")
            return go(node[1]) * den.coefficient(z, z).inverse()
        if kind == "pow":
            return go(node[1]) ** int_exponent(node[2])
        raise ParseError(f"unexpected {kind} in operator expression")

    return go(tree)


def _infer_rank(tree) -> int:
    best = 0
    stack = [tree]
    while stack:
        node = stack.pop()
        if node[0] == "name":
            n = node[1]
            if n[:1] in ("M", "L"):
                if n[1:].isdigit():
                    best = max(best, int(n[1:]))
                elif n in ("M", "L"):
                    best = max(best, 1)
        elif node[0] in ("neg",):
            stack.append(node[1])
        elif node[0] in ("add", "sub", "mul", "div", "pow"):
            stack.extend(node[1:])
    return max(best, 1)
