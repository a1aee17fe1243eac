"""Exact rational functions in ``q`` and a few named parameters.

A :class:`Scalar` is a reduced fraction of two integer polynomials in the
variables ``q, p_1, ..., p_m``.  Polynomials are python-flint ``fmpz_mpoly``
objects.  The canonical form is

* numerator and denominator coprime (gcd removed, integer content included),
* denominator with positive leading coefficient in lex order,
* zero stored as ``0/1``,
* the variable set shrunk to ``q`` plus the parameters that actually occur.

The last point makes structural equality independent of the order in which
parameters were introduced: ``Scalar.param("x") - Scalar.param("x")`` is the
plain integer zero.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Union

import flint

from .textparse import ParseError, int_exponent, parse_arith

__all__ = [
    "Scalar",
    "QEvaluationPoint",
    "PoleError",
    "ScalarLike",
    "as_scalar",
    "parse_scalar",
]

ScalarLike = Union["Scalar", int, Fraction]

Q = "q"


class PoleError(ZeroDivisionError):
    """Raised when a denominator vanishes; ``factor`` names the culprit."""

    def __init__(self, message: str, factor: str | None = None):
        super().__init__(message)
        self.factor = factor


@functools.lru_cache(maxsize=None)
def _ctx(params: tuple[str, ...]) -> flint.fmpz_mpoly_ctx:
    return flint.fmpz_mpoly_ctx.get((Q,) + params, "lex")


def _params_of(ctx) -> tuple[str, ...]:
    return tuple(ctx.names()[1:])


def _lift(poly, params: tuple[str, ...]):
    """Re-embed ``poly`` into the context for ``params`` (a superset)."""
    target = _ctx(params)
    if poly.context() is target:
        return poly
    return poly.project_to_context(target)


def _shrink(num, den):
    """Drop parameters used by neither polynomial."""
    ctx = num.context()
    names = ctx.names()
    if len(names) == 1:
        return num, den
    used = [False] * len(names)
    for poly in (num, den):
        for i, d in enumerate(poly.degrees()):
            if d > 0:
                used[i] = True
    keep = tuple(n for n, u in zip(names[1:], used[1:]) if u)
    if len(keep) == len(names) - 1:
        return num, den
    target = _ctx(keep)
    return num.project_to_context(target), den.project_to_context(target)


def _merge(a: tuple[str, ...], b: tuple[str, ...]) -> tuple[str, ...]:
    if a == b:
        return a
    return tuple(sorted(set(a) | set(b)))


class Scalar:
    """An element of Q(q, params), immutable and canonically reduced."""

    __slots__ = ("_num", "_den", "_hash")

    def __init__(self, num, den=None, *, _reduced: bool = False):
        if den is None:
            den = num.context().from_dict({(0,) * num.context().nvars(): 1})
        if num.context() is not den.context():
            params = _merge(_params_of(num.context()), _params_of(den.context()))
            num, den = _lift(num, params), _lift(den, params)
        if not _reduced:
            if den.is_zero():
                raise PoleError("zero denominator")
            if num.is_zero():
                one = _ctx(())
                num = one.from_dict({})
                den = one.from_dict({(0,): 1})
            else:
                g = num.gcd(den)
                if not g.is_one():
                    num = num / g
                    den = den / g
                if den.leading_coefficient() < 0:
                    num, den = -num, -den
                num, den = _shrink(num, den)
        self._num = num
        self._den = den
        self._hash = None

    # -- construction -------------------------------------------------
    @classmethod
    def from_int(cls, value: int) -> "Scalar":
        return _int_scalar(int(value))

    @classmethod
    def from_fraction(cls, value: Fraction) -> "Scalar":
        ctx = _ctx(())
        return cls(ctx.from_dict({(0,): value.numerator}), ctx.from_dict({(0,): value.denominator}))

    @classmethod
    def q(cls) -> "Scalar":
        return cls.qpow(1)

    @classmethod
    def qpow(cls, e: int) -> "Scalar":
        """``q**e`` for any integer ``e``."""
        return _qpow_cached(int(e))

    @classmethod
    def param(cls, name: str) -> "Scalar":
        if name == Q or not name.isidentifier():
            raise ValueError(f"invalid parameter name {name!r}")
        ctx = _ctx((name,))
        return cls(ctx.gens()[1], _reduced=False)

    @classmethod
    def from_dicts(cls, params: tuple[str, ...], num: Mapping, den: Mapping | None = None) -> "Scalar":
        """Build from exponent dicts over the variables ``(q,) + params``."""
        params = tuple(params)
        order = tuple(sorted(params))
        perm = [0] + [1 + params.index(p) for p in order]
        ctx = _ctx(order)

        def conv(d):
            out = {}
            for e, c in d.items():
                key = tuple(e[i] for i in perm)
                out[key] = out.get(key, 0) + int(c)
            return ctx.from_dict({k: v for k, v in out.items() if v})

        n = conv(num)
        dd = conv(den) if den is not None else ctx.from_dict({(0,) * (len(order) + 1): 1})
        return cls(n, dd)

    # -- accessors ----------------------------------------------------
    @property
    def numerator(self):
        return self._num

    @property
    def denominator(self):
        return self._den

    @property
    def params(self) -> tuple[str, ...]:
        return _params_of(self._num.context())

    def is_zero(self) -> bool:
        return self._num.is_zero()

    def is_one(self) -> bool:
        return self._num.is_one() and self._den.is_one()

    def is_constant(self) -> bool:
        return self._num.is_constant() and self._den.is_constant()

    def is_polynomial(self) -> bool:
        return self._den.is_constant()

    def as_fraction(self) -> Fraction:
        if not self.is_constant():
            raise ValueError(f"{self} is not a rational constant")
        nd = self._num.to_dict()
        dd = self._den.to_dict()
        n = int(next(iter(nd.values()))) if nd else 0
        return Fraction(n, int(next(iter(dd.values()))))

    def __bool__(self) -> bool:
        return not self._num.is_zero()

    # -- arithmetic ---------------------------------------------------
    def _pair(self, other: "Scalar"):
        if self._num.context() is other._num.context():
            return self._num, self._den, other._num, other._den
        params = _merge(self.params, other.params)
        return (
            _lift(self._num, params),
            _lift(self._den, params),
            _lift(other._num, params),
            _lift(other._den, params),
        )

    def __add__(self, other: ScalarLike) -> "Scalar":
        other = _try_scalar(other)
        if other is None:
            return NotImplemented
        if other.is_zero():
            return self
        if self.is_zero():
            return other
        a, b, c, d = self._pair(other)
        if b == d:
            return Scalar(a + c, b)
        return Scalar(a * d + b * c, b * d)

    __radd__ = __add__

    def __neg__(self) -> "Scalar":
        return Scalar(-self._num, self._den, _reduced=True)

    def __sub__(self, other: ScalarLike) -> "Scalar":
        other = _try_scalar(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other: ScalarLike) -> "Scalar":
        other = _try_scalar(other)
        if other is None:
            return NotImplemented
        return other + (-self)

    def __mul__(self, other: ScalarLike) -> "Scalar":
        other = _try_scalar(other)
        if other is None:
            return NotImplemented
        if self.is_zero() or other.is_zero():
            return ZERO
        if other.is_one():
            return self
        if self.is_one():
            return other
        a, b, c, d = self._pair(other)
        # cross-cancel first to keep intermediate products small
        g1 = a.gcd(d)
        g2 = c.gcd(b)
        if not g1.is_one():
            a, d = a / g1, d / g1
        if not g2.is_one():
            c, b = c / g2, b / g2
        num, den = a * c, b * d
        if den.leading_coefficient() < 0:
            num, den = -num, -den
        num, den = _shrink(num, den)
        return Scalar(num, den, _reduced=True)

    __rmul__ = __mul__

    def inverse(self) -> "Scalar":
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero Scalar")
        num, den = self._den, self._num
        if den.leading_coefficient() < 0:
            num, den = -num, -den
        return Scalar(num, den, _reduced=True)

    def __truediv__(self, other: ScalarLike) -> "Scalar":
        other = _try_scalar(other)
        if other is None:
            return NotImplemented
        if other.is_zero():
            raise ZeroDivisionError("division by zero Scalar")
        return self * other.inverse()

    def __rtruediv__(self, other: ScalarLike) -> "Scalar":
        other = _try_scalar(other)
        if other is None:
            return NotImplemented
        return other / self

    def __pow__(self, e: int) -> "Scalar":
        e = int(e)
        if e == 0:
            return ONE
        if e < 0:
            return self.inverse() ** (-e)
        return Scalar(self._num**e, self._den**e, _reduced=True)

    # -- comparison ---------------------------------------------------
    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            other = as_scalar(other)
        if not isinstance(other, Scalar):
            return NotImplemented
        if self._num.context() is not other._num.context():
            return False
        return self._num == other._num and self._den == other._den

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(
                (self.params, tuple(self._num.to_dict().items()), tuple(self._den.to_dict().items()))
            )
        return self._hash

    # -- maps ---------------------------------------------------------
    def rescale_q(self, c: int) -> "Scalar":
        """Image under the field map ``q -> q**c`` (parameters fixed)."""
        c = int(c)
        if c == 0:
            raise ValueError("rescale_q requires a nonzero exponent")
        if c == 1 or self.is_constant():
            return self
        ctx = self._num.context()

        def scaled(poly):
            d = poly.to_dict()
            low = min(e[0] * c for e in d)
            return ctx.from_dict({(e[0] * c - low,) + e[1:]: v for e, v in d.items()}), low

        n, ln = scaled(self._num)
        dd, ld = scaled(self._den)
        return Scalar(n, dd) * Scalar.qpow(ln - ld)

    def substitute(self, values: Mapping[str, "Scalar"]) -> "Scalar":
        """Substitute Scalars for parameters (not for ``q``)."""
        if not values:
            return self
        names = self._num.context().names()
        gens = [Scalar.q()] + [values.get(n, Scalar.param(n)) for n in names[1:]]
        return _eval_poly(self._num, gens) / _eval_poly(self._den, gens)

    def evaluate(self, point: "QEvaluationPoint") -> Fraction:
        """Exact rational value at a point (error names the vanishing factor)."""
        names = self._num.context().names()
        vals = [point.q] + [point.value_of(n) for n in names[1:]]
        den = _eval_fraction(self._den, vals)
        if den == 0:
            raise PoleError(f"denominator of {self} vanishes at {point}", _vanishing_factor(self._den, vals))
        return _eval_fraction(self._num, vals) / den

    def eval_mod(self, p: int, q0: int, params: Mapping[str, int]):
        """Value in ``Z/p`` at ``q=q0`` and the given parameter residues."""
        names = self._num.context().names()
        vals = [q0] + [params[n] for n in names[1:]]
        den = _eval_mod(self._den, vals, p)
        if den == 0:
            raise PoleError(f"denominator of {self} vanishes mod {p}")
        return _eval_mod(self._num, vals, p) * pow(den, -1, p) % p

    # -- text ---------------------------------------------------------
    def __str__(self) -> str:
        num = str(self._num)
        if self._den.is_one():
            return num
        den = str(self._den)
        if len(self._num.to_dict()) > 1:
            num = f"({num})"
        if len(self._den.to_dict()) > 1 or "*" in den:
            den = f"({den})"
        return f"{num}/{den}"

    def __repr__(self) -> str:
        return f"Scalar({str(self)!r})"

    def needs_parens(self) -> bool:
        """True if the printed form is not a single product of factors."""
        return len(self._num.to_dict()) > 1 or not self._den.is_one() or str(self._num).startswith("-")


def _int_scalar_uncached(value: int) -> Scalar:
    ctx = _ctx(())
    return Scalar(ctx.from_dict({(0,): value} if value else {}), ctx.from_dict({(0,): 1}), _reduced=True)


@functools.lru_cache(maxsize=512)
def _int_scalar(value: int) -> Scalar:
    return _int_scalar_uncached(value)


@functools.lru_cache(maxsize=4096)
def _qpow_cached(e: int) -> Scalar:
    ctx = _ctx(())
    if e >= 0:
        return Scalar(ctx.from_dict({(e,): 1}), ctx.from_dict({(0,): 1}), _reduced=True)
    return Scalar(ctx.from_dict({(0,): 1}), ctx.from_dict({(-e,): 1}), _reduced=True)


ZERO = _int_scalar_uncached(0)
ONE = _int_scalar_uncached(1)


def as_scalar(value: ScalarLike) -> Scalar:
    if isinstance(value, Scalar):
        return value
    if isinstance(value, bool):
        raise TypeError("bool is not a Scalar")
    if isinstance(value, int):
        return Scalar.from_int(value)
    if isinstance(value, Fraction):
        return Scalar.from_fraction(value)
    raise TypeError(f"cannot convert {type(value).__name__} to Scalar")


def _try_scalar(value) -> Scalar | None:
    if isinstance(value, Scalar):
        return value
    if isinstance(value, (int, Fraction)) and not isinstance(value, bool):
        return as_scalar(value)
    return None


def _eval_fraction(poly, vals: list[Fraction]) -> Fraction:
    total = Fraction(0)
    for exps, c in poly.to_dict().items():
        term = Fraction(int(c))
        for v, e in zip(vals, exps):
            if e:
                term *= v ** int(e)
        total += term
    return total


def _eval_mod(poly, vals: list[int], p: int) -> int:
    total = 0
    for exps, c in poly.to_dict().items():
        term = int(c) % p
        for v, e in zip(vals, exps):
            if e:
                term = term * pow(v, int(e), p) % p
        total += term
    return total % p


def _eval_poly(poly, gens: list[Scalar]) -> Scalar:
    total = ZERO
    for exps, c in poly.to_dict().items():
        term = Scalar.from_int(int(c))
        for g, e in zip(gens, exps):
            if e:
                term = term * g ** int(e)
        total = total + term
    return total


def _vanishing_factor(poly, vals) -> str | None:
    _, factors = poly.factor()
    for f, _mult in factors:
        if _eval_fraction(f, vals) == 0:
            return str(f)
    return None


@dataclass(frozen=True)
class QEvaluationPoint:
    """A rational specialization of ``q`` and of the declared parameters."""

    q: Fraction
    params: tuple[tuple[str, Fraction], ...] = field(default=())

    def __post_init__(self):
        q = Fraction(self.q)
        if q in (0, 1, -1):
            raise ValueError(f"q may not be specialized to {q}")
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "params", tuple(sorted((n, Fraction(v)) for n, v in self.params)))

    @classmethod
    def make(cls, q, **params) -> "QEvaluationPoint":
        return cls(Fraction(q), tuple(params.items()))

    def value_of(self, name: str) -> Fraction:
        for n, v in self.params:
            if n == name:
                return v
        raise KeyError(f"parameter {name!r} has no value at this evaluation point")

    def __str__(self) -> str:
        parts = [f"q={self.q}"] + [f"{n}={v}" for n, v in self.params]
        return "{" + ", ".join(parts) + "}"


def scalar_from_tree(node, names: Iterable[str] | None = None) -> Scalar:
    """Interpret an arithmetic tree as a Scalar.

    ``names`` restricts which identifiers are accepted as parameters;
    ``None`` accepts any identifier other than ``q``.
    """
    allowed = None if names is None else set(names)

    def go(n) -> Scalar:
        kind = n[0]
        if kind == "num":
            return Scalar.from_int(n[1])
        if kind == "name":
            if n[1] == Q:
                return Scalar.q()
            if allowed is not None and n[1] not in allowed:
                raise ParseError(f"undeclared parameter {n[1]!r}")
            return Scalar.param(n[1])
        if kind == "neg":
            return -go(n[1])
        if kind == "add":
            return go(n[1]) + go(n[2])
        if kind == "sub":
            return go(n[1]) - go(n[2])
        if kind == "mul":
            return go(n[1]) * go(n[2])
        if kind == "div":
            return go(n[1]) / go(n[2])
        if kind == "pow":
            return go(n[1]) ** int_exponent(n[2])
        raise ParseError(f"unexpected {kind} in scalar expression")

    return go(node)


def parse_scalar(text: str, names: Iterable[str] | None = None) -> Scalar:
    """Parse the textual scalar form; inverse of ``str``."""
    return scalar_from_tree(parse_arith(text), names)
