"""Expression language for sequences.

Grammar (usual precedence, ``^`` binds tightest and is right associative)::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := ('-' | '+') unary | power
    power  := atom ('^' unary)?
    atom   := INT | NAME | NAME '(' args ')' | '(' expr ')'
            | 'sum'   '(' NAME '=' expr '..' expr ',' expr ')'
            | 'sumZ'  '(' NAME ',' expr ')'
            | 'subst' '(' expr ';' NAME '->' expr (',' NAME '->' expr)* ')'
            | 'patch' '(' expr ';' point '->' expr (',' point '->' expr)* ')'
    point  := signed-int | '(' signed-int (',' signed-int)* ')'

Names are sequence variables (declared, in order), parameters such as
``x``, the variable ``q``, bound summation variables or builtin names.
``conv(f, g)`` and ``rescale(c, f)`` are ordinary calls.  Compiling maps
every form onto the corresponding combinator of :mod:`qhol.sequence`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence as Seq

from .catalog import ARITY, ALIASES, UnknownBuiltin, builtin
from .scalar import ONE, Scalar
from .sequence import (
    Sequence,
    SupportError,
    constant,
    seq_add,
    seq_affine,
    seq_convolve,
    seq_mul,
    seq_multisum,
    seq_neg,
    seq_patch_finite,
    seq_rescale_q,
    seq_scale,
    seq_sub,
)
from .system import AnnihilatorSystem
from .textparse import ParseError, _Cursor, tokenize
from .weyl import WeylOperator

__all__ = [
    "DslError",
    "DslSyntaxError",
    "UndeclaredVariable",
    "ArityError",
    "UnknownFunction",
    "DslTypeError",
    "DslSupportError",
    "Num",
    "Name",
    "Neg",
    "BinOp",
    "Pow",
    "Call",
    "Sum",
    "SumZ",
    "Subst",
    "Patch",
    "parse",
    "to_text",
    "free_variables",
    "compile_expr",
    "compile_text",
]

SPECIAL = ("sum", "sumZ", "subst", "patch", "conv", "rescale")


# -- errors -----------------------------------------------------------------


class DslError(ValueError):
    """Base class; ``code`` is a stable machine-readable tag."""

    code = "dsl-error"

    def to_json(self) -> dict:
        return {"code": self.code, "message": str(self)}


class DslSyntaxError(DslError):
    code = "syntax-error"

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column

    def to_json(self) -> dict:
        return {"code": self.code, "message": str(self), "line": self.line, "column": self.column}


class UndeclaredVariable(DslError):
    code = "undeclared-variable"


class ArityError(DslError):
    code = "arity-mismatch"


class UnknownFunction(DslError):
    code = "unknown-function"


class DslTypeError(DslError):
    code = "type-error"


class DslSupportError(DslError):
    code = "support-error"


# -- syntax tree ----------------------------------------------------------------


@dataclass(frozen=True)
class Num:
    value: int


@dataclass(frozen=True)
class Name:
    id: str


@dataclass(frozen=True)
class Neg:
    arg: object


@dataclass(frozen=True)
class BinOp:
    op: str  # one of + - * /
    left: object
    right: object


@dataclass(frozen=True)
class Pow:
    base: object
    exp: object


@dataclass(frozen=True)
class Call:
    func: str
    args: tuple


@dataclass(frozen=True)
class Sum:
    var: str
    lo: object
    hi: object
    body: object


@dataclass(frozen=True)
class SumZ:
    var: str
    body: object


@dataclass(frozen=True)
class Subst:
    body: object
    pairs: tuple  # ((var, expr), ...)


@dataclass(frozen=True)
class Patch:
    body: object
    pairs: tuple  # ((point tuple, expr), ...)


# -- parser ---------------------------------------------------------------------


class _Parser:
    def __init__(self, text: str):
        try:
            self.c = _Cursor(tokenize(text))
        except ParseError as exc:
            raise DslSyntaxError(exc.message, exc.line, exc.column) from None

    def fail(self, message: str, tok=None):
        tok = tok or self.c.tok
        raise DslSyntaxError(message, tok.line, tok.column)

    def expect(self, text: str):
        try:
            return self.c.expect(text)
        except ParseError as exc:
            raise DslSyntaxError(exc.message, exc.line, exc.column) from None

    def name(self) -> str:
        t = self.c.tok
        if t.kind != "name":
            self.fail(f"expected a name, found {t.text or 'end of input'!r}")
        self.c.take()
        return t.text

    def parse(self):
        node = self.expr()
        if self.c.tok.kind != "end":
            self.fail(f"trailing input {self.c.tok.text!r}")
        return node

    def expr(self):
        node = self.term()
        while self.c.tok.kind == "op" and self.c.tok.text in ("+", "-"):
            op = self.c.take().text
            node = BinOp(op, node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.c.tok.kind == "op" and self.c.tok.text in ("*", "/"):
            op = self.c.take().text
            node = BinOp(op, node, self.unary())
        return node

    def unary(self):
        if self.c.accept("-"):
            return Neg(self.unary())
        if self.c.accept("+"):
            return self.unary()
        return self.power()

    def power(self):
        base = self.atom()
        if self.c.accept("^"):
            return Pow(base, self.unary())
        return base

    def signed_int(self) -> int:
        sign = -1 if self.c.accept("-") else 1
        t = self.c.tok
        if t.kind != "num":
            self.fail(f"expected an integer, found {t.text or 'end of input'!r}")
        self.c.take()
        return sign * int(t.text)

    def point(self) -> tuple[int, ...]:
        if self.c.accept("("):
            coords = [self.signed_int()]
            while self.c.accept(","):
                coords.append(self.signed_int())
            self.expect(")")
            return tuple(coords)
        return (self.signed_int(),)

    def atom(self):
        t = self.c.tok
        if t.kind == "num":
            self.c.take()
            return Num(int(t.text))
        if t.kind == "name":
            self.c.take()
            if not self.c.accept("("):
                return Name(t.text)
            if t.text == "sum":
                var = self.name()
                self.expect("=")
                lo = self.expr()
                self.expect("..")
                hi = self.expr()
                self.expect(",")
                body = self.expr()
                self.expect(")")
                return Sum(var, lo, hi, body)
            if t.text == "sumZ":
                var = self.name()
                self.expect(",")
                body = self.expr()
                self.expect(")")
                return SumZ(var, body)
            if t.text in ("subst", "patch"):
                body = self.expr()
                self.expect(";")
                pairs = []
                while True:
                    key = self.name() if t.text == "subst" else self.point()
                    self.expect("->")
                    pairs.append((key, self.expr()))
                    if not self.c.accept(","):
                        break
                self.expect(")")
                return (Subst if t.text == "subst" else Patch)(body, tuple(pairs))
            args = [self.expr()]
            while self.c.accept(","):
                args.append(self.expr())
            self.expect(")")
            return Call(t.text, tuple(args))
        if self.c.accept("("):
            node = self.expr()
            self.expect(")")
            return node
        self.fail(f"unexpected {t.text or 'end of input'!r}")


def parse(text: str):
    """Parse DSL text into a syntax tree."""
    return _Parser(text).parse()


# -- printer ----------------------------------------------------------------------

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2}


def _prec(node) -> int:
    if isinstance(node, BinOp):
        return _PREC[node.op]
    if isinstance(node, Neg):
        return 3
    if isinstance(node, Pow):
        return 4
    return 5


def _wrap(node, need: int) -> str:
    text = to_text(node)
    return f"({text})" if _prec(node) < need else text


def _point_text(p: tuple[int, ...]) -> str:
    return str(p[0]) if len(p) == 1 else "(" + ", ".join(map(str, p)) + ")"


def to_text(node) -> str:
    """Canonical text; ``parse(to_text(e)) == e``."""
    if isinstance(node, Num):
        return str(node.value)
    if isinstance(node, Name):
        return node.id
    if isinstance(node, Neg):
        return "-" + _wrap(node.arg, 3)
    if isinstance(node, BinOp):
        p = _PREC[node.op]
        sep = f" {node.op} " if p == 1 else node.op
        return _wrap(node.left, p) + sep + _wrap(node.right, p + 1)
    if isinstance(node, Pow):
        return _wrap(node.base, 5) + "^" + _wrap(node.exp, 3)
    if isinstance(node, Call):
        return f"{node.func}(" + ", ".join(to_text(a) for a in node.args) + ")"
    if isinstance(node, Sum):
        return f"sum({node.var} = {to_text(node.lo)}..{to_text(node.hi)}, {to_text(node.body)})"
    if isinstance(node, SumZ):
        return f"sumZ({node.var}, {to_text(node.body)})"
    if isinstance(node, Subst):
        pairs = ", ".join(f"{v} -> {to_text(e)}" for v, e in node.pairs)
        return f"subst({to_text(node.body)}; {pairs})"
    if isinstance(node, Patch):
        pairs = ", ".join(f"{_point_text(p)} -> {to_text(e)}" for p, e in node.pairs)
        return f"patch({to_text(node.body)}; {pairs})"
    raise TypeError(f"not a DSL node: {node!r}")


# -- analysis helpers ---------------------------------------------------------------


def _known_function(name: str) -> bool:
    return name in ARITY or name in ALIASES or name in SPECIAL


def free_variables(node, params: Iterable[str] = ()) -> list[str]:
    """Free variable names in order of first appearance."""
    params = set(params) | {"q"}
    out: list[str] = []

    def go(n, bound: frozenset):
        if isinstance(n, Name):
            if n.id not in bound and n.id not in params and n.id not in out:
                out.append(n.id)
        elif isinstance(n, Neg):
            go(n.arg, bound)
        elif isinstance(n, BinOp):
            go(n.left, bound)
            go(n.right, bound)
        elif isinstance(n, Pow):
            go(n.base, bound)
            go(n.exp, bound)
        elif isinstance(n, Call):
            for a in n.args:
                go(a, bound)
        elif isinstance(n, Sum):
            go(n.lo, bound)
            go(n.hi, bound)
            go(n.body, bound | {n.var})
        elif isinstance(n, SumZ):
            go(n.body, bound | {n.var})
        elif isinstance(n, Subst):
            go(n.body, bound)
            for _, e in n.pairs:
                go(e, bound)
        elif isinstance(n, Patch):
            go(n.body, bound)
            for _, e in n.pairs:
                go(e, bound)

    go(node, frozenset())
    return out


class _Compiler:
    def __init__(self, params: Iterable[str]):
        self.params = set(params)

    # names ----------------------------------------------------------------
    def check_name(self, name: str, scope: Seq[str]) -> None:
        if name in scope or name == "q" or name in self.params:
            return
        if _known_function(name):
            raise DslTypeError(f"{name!r} is a function and needs arguments")
        raise UndeclaredVariable(f"undeclared variable {name!r}; declared: {', '.join(scope) or 'none'}")

    def mentions(self, node, scope: Seq[str]) -> bool:
        return any(v in scope for v in free_variables(node, self.params))

    def is_scalar(self, node, scope: Seq[str]) -> bool:
        if isinstance(node, Num):
            return True
        if isinstance(node, Name):
            self.check_name(node.id, scope)
            return node.id not in scope
        if isinstance(node, Neg):
            return self.is_scalar(node.arg, scope)
        if isinstance(node, BinOp):
            return self.is_scalar(node.left, scope) and self.is_scalar(node.right, scope)
        if isinstance(node, Pow):
            return self.is_scalar(node.base, scope) and self.is_scalar(node.exp, scope)
        return False

    # scalar values ----------------------------------------------------------
    def scalar(self, node) -> Scalar:
        if isinstance(node, Num):
            return Scalar.from_int(node.value)
        if isinstance(node, Name):
            return Scalar.q() if node.id == "q" else Scalar.param(node.id)
        if isinstance(node, Neg):
            return -self.scalar(node.arg)
        if isinstance(node, BinOp):
            a, b = self.scalar(node.left), self.scalar(node.right)
            if node.op == "/" and b.is_zero():
                raise DslTypeError("division by zero")
            return {"+": a.__add__, "-": a.__sub__, "*": a.__mul__, "/": a.__truediv__}[node.op](b)
        if isinstance(node, Pow):
            return self.scalar(node.base) ** self.int_constant(node.exp)
        raise DslTypeError(f"{to_text(node)} is not a scalar")

    def int_constant(self, node) -> int:
        c = self.scalar(node)
        if not c.is_constant() or c.as_fraction().denominator != 1:
            raise DslTypeError(f"{to_text(node)} must be an integer")
        return int(c.as_fraction())

    # integer expressions in the variables -----------------------------------------
    def int_poly(self, node, scope: Seq[str]):
        """Integer polynomial in the variables; returns ``env -> int``."""
        if isinstance(node, Num):
            v = node.value
            return lambda env: v
        if isinstance(node, Name):
            if node.id in scope:
                i = list(scope).index(node.id)
                return lambda env: env[i]
            self.check_name(node.id, scope)
            raise DslTypeError(f"{node.id!r} is not an integer variable")
        if isinstance(node, Neg):
            g = self.int_poly(node.arg, scope)
            return lambda env: -g(env)
        if isinstance(node, BinOp) and node.op != "/":
            a, b = self.int_poly(node.left, scope), self.int_poly(node.right, scope)
            if node.op == "+":
                return lambda env: a(env) + b(env)
            if node.op == "-":
                return lambda env: a(env) - b(env)
            return lambda env: a(env) * b(env)
        if isinstance(node, Pow):
            e = self.int_constant(node.exp)
            if e < 0:
                raise DslTypeError("negative powers are not integer valued")
            a = self.int_poly(node.base, scope)
            return lambda env: a(env) ** e
        raise DslTypeError(f"{to_text(node)} is not an integer expression in {', '.join(scope)}")

    def affine(self, node, scope: Seq[str]) -> tuple[list[int], int]:
        """Coefficients and constant of an affine integer expression."""
        g = self.int_poly(node, scope)
        r = len(scope)
        c = g((0,) * r)
        coeffs = []
        for i in range(r):
            e = tuple(int(i == j) for j in range(r))
            coeffs.append(g(e) - c)
        # an affine function is determined by these values; check a few more
        for probe in ((2,) * r, tuple(range(1, r + 1)), tuple(-v - 1 for v in range(r))):
            if g(probe) != c + sum(a * x for a, x in zip(coeffs, probe)):
                raise DslTypeError(f"{to_text(node)} must be affine in {', '.join(scope)}")
        return coeffs, c

    # sequences ----------------------------------------------------------------
    def seq(self, node, scope: tuple[str, ...]) -> Sequence:
        r = len(scope)
        if self.is_scalar(node, scope):
            return constant(r, self.scalar(node), names=scope)
        if isinstance(node, Name):
            raise DslTypeError(f"variable {node.id!r} cannot stand alone; use it in arguments or exponents")
        if isinstance(node, Neg):
            return seq_neg(self.seq(node.arg, scope))
        if isinstance(node, BinOp):
            return self.binop(node, scope)
        if isinstance(node, Pow):
            return self.power(node, scope)
        if isinstance(node, Call):
            return self.call(node, scope)
        if isinstance(node, Sum):
            return self.bounded_sum(node, scope)
        if isinstance(node, SumZ):
            return self.full_sum(node, scope)
        if isinstance(node, Subst):
            return self.subst(node, scope)
        if isinstance(node, Patch):
            return self.patch(node, scope)
        raise DslTypeError(f"cannot compile {node!r}")

    def binop(self, node: BinOp, scope) -> Sequence:
        ls, rs = self.is_scalar(node.left, scope), self.is_scalar(node.right, scope)
        if node.op == "/":
            if not rs:
                raise DslTypeError("only division by a scalar is supported")
            c = self.scalar(node.right)
            if c.is_zero():
                raise DslTypeError("division by zero")
            return seq_scale(self.seq(node.left, scope), ONE / c)
        if node.op == "*" and (ls or rs):
            s, other = (node.left, node.right) if ls else (node.right, node.left)
            return seq_scale(self.seq(other, scope), self.scalar(s))
        a, b = self.seq(node.left, scope), self.seq(node.right, scope)
        if node.op == "+":
            return seq_add(a, b)
        if node.op == "-":
            return seq_sub(a, b)
        return seq_mul(a, b)

    def power(self, node: Pow, scope) -> Sequence:
        if self.is_scalar(node.base, scope):
            return self.geometric(self.scalar(node.base), node.exp, scope)
        e = self.int_constant(node.exp)
        if e < 0:
            raise DslTypeError("a sequence can only be raised to a non-negative integer power")
        base = self.seq(node.base, scope)
        out = constant(len(scope), 1, names=scope)
        for _ in range(e):
            out = seq_mul(out, base)
        return out

    def geometric(self, c: Scalar, exp_node, scope) -> Sequence:
        """``n -> c^{e(n)}`` for an integer polynomial ``e``."""
        if c.is_zero():
            raise DslTypeError("zero cannot be raised to a variable power")
        e = self.int_poly(exp_node, scope)
        r = len(scope)

        def ev(n, d, _c=c, _e=e):
            k = _e(n)
            base = d.coerce(_c)
            return base**k if k >= 0 else (d.one / base) ** (-k)

        system = None
        try:
            coeffs, _ = self.affine(exp_node, scope)
        except DslTypeError:
            coeffs = None
        if coeffs is not None:
            dirs = {i: WeylOperator.L(i, r) - WeylOperator.scalar(r, c**a) for i, a in enumerate(coeffs)}
            system = AnnihilatorSystem.make(r, dirs, note="geometric")
        label = f"({c})^({to_text(exp_node)})"
        return Sequence(r, ev, names=scope, label=label, params=c.params, system=system)

    def call(self, node: Call, scope) -> Sequence:
        name = node.func
        if name == "conv":
            if len(node.args) != 2:
                raise ArityError("conv takes two arguments")
            a, b = (self.seq(x, scope) for x in node.args)
            try:
                return seq_convolve(a, b)
            except SupportError as exc:
                raise DslSupportError(str(exc)) from None
        if name == "rescale":
            if len(node.args) != 2:
                raise ArityError("rescale takes an integer and a sequence")
            c = self.int_constant(node.args[0])
            if c == 0:
                raise DslTypeError("rescale needs a nonzero exponent")
            return seq_rescale_q(self.seq(node.args[1], scope), c)
        if name in ("sum", "sumZ", "subst", "patch"):
            raise DslSyntaxError(f"{name} needs its special argument form", 1, 1)
        try:
            f = builtin(name)
        except UnknownBuiltin:
            raise UnknownFunction(f"unknown function {name!r}") from None
        if len(node.args) != f.rank:
            raise ArityError(f"{name} takes {f.rank} argument(s), got {len(node.args)}")
        self.params.update(f.params)
        A, b = [], []
        for arg in node.args:
            coeffs, c = self.affine(arg, scope)
            A.append(coeffs)
            b.append(c)
        r = len(scope)
        if r == f.rank and all(A[i][j] == int(i == j) for i in range(r) for j in range(r)) and not any(b):
            return f.with_names(scope)
        return seq_affine(f, A, b, names=scope)

    def _bind(self, var: str, scope) -> tuple[str, ...]:
        if var in scope:
            raise DslTypeError(f"summation variable {var!r} shadows a declared variable")
        if var == "q" or var in self.params:
            raise DslTypeError(f"summation variable {var!r} clashes with a parameter")
        return tuple(scope) + (var,)

    def bounded_sum(self, node: Sum, scope) -> Sequence:
        inner = self._bind(node.var, scope)
        body = self.seq(node.body, inner)
        r = len(scope)
        lo, lo_c = self.affine(node.lo, scope)
        hi, hi_c = self.affine(node.hi, scope)
        h = seq_multisum(body, "bounded", names=tuple(scope) + (f"{node.var}_lo", f"{node.var}_hi"))
        A = [[int(i == j) for j in range(r)] for i in range(r)] + [lo, hi]
        return seq_affine(h, A, [0] * r + [lo_c, hi_c], names=scope)

    def full_sum(self, node: SumZ, scope) -> Sequence:
        inner = self._bind(node.var, scope)
        body = self.seq(node.body, inner)
        try:
            return seq_multisum(body, "full", names=scope)
        except SupportError as exc:
            raise DslSupportError(f"sumZ({node.var}, ...): {exc}") from None

    def subst(self, node: Subst, scope) -> Sequence:
        body = self.seq(node.body, scope)
        mapping = {}
        for var, e in node.pairs:
            if var not in scope:
                raise UndeclaredVariable(f"substituted variable {var!r} is not declared")
            mapping[var] = self.affine(e, scope)
        A, b = [], []
        for i, v in enumerate(scope):
            coeffs, c = mapping.get(v, ([int(i == j) for j in range(len(scope))], 0))
            A.append(coeffs)
            b.append(c)
        return seq_affine(body, A, b, names=scope)

    def patch(self, node: Patch, scope) -> Sequence:
        body = self.seq(node.body, scope)
        mods = {}
        for point, e in node.pairs:
            if len(point) != len(scope):
                raise ArityError(f"patch point {point} needs {len(scope)} coordinate(s)")
            if not self.is_scalar(e, scope):
                raise DslTypeError("patched values must be scalars")
            mods[point] = self.scalar(e)
        return seq_patch_finite(body, mods)


def compile_expr(node, variables: Seq[str] | None = None, params: Iterable[str] = ()) -> Sequence:
    """Compile a syntax tree into a :class:`Sequence` over ``variables``.

    Without ``variables`` the free variables are taken in order of first
    appearance.
    """
    params = tuple(params)
    if variables is None:
        variables = free_variables(node, params)
        variables = [v for v in variables if not _known_function(v)] or ["n"]
    scope = tuple(variables)
    if len(set(scope)) != len(scope):
        raise DslTypeError("variable names must be distinct")
    for v in scope:
        if v == "q" or v in params:
            raise DslTypeError(f"{v!r} cannot be both a variable and a parameter")
    comp = _Compiler(params)
    seq = comp.seq(node, scope)
    if seq.names != scope:
        seq = seq.with_names(scope)
    return seq


def compile_text(text: str, variables: Seq[str] | None = None, params: Iterable[str] = ()) -> Sequence:
    """``compile_expr(parse(text), ...)`` with the text kept as the label."""
    seq = compile_expr(parse(text), variables, params)
    return seq._derive(label=text)
