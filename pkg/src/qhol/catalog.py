"""The builtin sequences and their attached annihilators.

Every evaluator is written against the domain interface of
:mod:`qhol.domains`, so the same code produces exact Scalars and residues
mod p.  One-variable sequences carry the recurrences printed in the
classical examples (multiplied out so that they hold on all of ``Z``);
the several-variable ones carry first-order operators derived from their
shift quotients.  :func:`builtin` re-checks every attached operator on a
window before handing the sequence out, unless asked not to.
"""

from __future__ import annotations

import functools
from typing import Callable

from .sequence import Sequence, SupportSpec
from .system import AnnihilatorSystem
from .weyl import parse_operator

__all__ = ["builtin", "BUILTINS", "ARITY", "UnknownBuiltin", "builtin_names"]


class UnknownBuiltin(KeyError):
    pass


# -- evaluators ---------------------------------------------------------------


def _alt(n, d):
    return d.one if n[0] % 2 == 0 else -d.one


def _qpow(n, d):
    return d.qpow(n[0])


def _qpow2(n, d):
    return d.qpow(n[0] * n[0])


def _qtri(n, d):
    return d.qpow(n[0] * (n[0] - 1) // 2)


def _delta(n, d):
    return d.one if n[0] == 0 else d.zero


def _heaviside(n, d):
    return d.one if n[0] >= 0 else d.zero


def _qpoch_value(m: int, d):
    out = d.one
    for j in range(1, m + 1):
        out = out * (d.one - d.qpow(j))
    return out


def _qpoch(n, d):
    return _qpoch_value(n[0], d) if n[0] >= 0 else d.zero


def _qpochinv(n, d):
    return d.one / _qpoch_value(n[0], d) if n[0] >= 0 else d.zero


def _xqpoch(n, d):
    x = d.param("x")
    m = n[0]
    out = d.one
    if m >= 0:
        for j in range(1, m + 1):
            out = out * (d.one - x * d.qpow(j - 1))
        return out
    for j in range(1, -m + 1):
        out = out * (d.one - x * d.qpow(-j))
    return d.one / out


def _delta2(n, d):
    return d.one if n[0] == n[1] else d.zero


def _F_value(n: int, k: int, d):
    if k < 0:
        return d.zero
    out = d.one
    for j in range(k):
        out = out * (d.one - d.qpow(n - j))
        if d.is_zero(out):
            return d.zero
    return out


def _Fseq(n, d):
    return _F_value(n[0], n[1], d)


def _Gseq(n, d):
    nn, k = n
    if k < 0:
        return d.zero
    num = _F_value(nn, k, d)
    if d.is_zero(num):
        return d.zero
    return num / _qpoch_value(k, d)


def _H_value(n: int, k: int, x, d):
    if k < 0:
        return d.zero
    out = d.one
    xinv = d.one / x
    for j in range(1, k + 1):
        num = x * d.qpow(n - j + 1) - xinv * d.qpow(-n + j - 1)
        den = d.qpow(j) - d.qpow(-j)
        out = out * num / den
    return out


def _Hbin(n, d):
    return _H_value(n[0], n[1], d.param("x"), d)


def _Kbin(n, d):
    return _H_value(n[0], n[1], d.qpow(n[2]), d)


def _cex(n, d):
    return d.one / (d.qpow(n[0]) + d.qpow(n[1]) + d.one)


# -- catalog ------------------------------------------------------------------

# name -> (arity, evaluator, domain convention, params, directions, extras)
_SPECS: dict[str, tuple] = {
    "alt": (1, _alt, "Z", (), {0: "L + 1"}, ()),
    "qpow": (1, _qpow, "Z", (), {0: "L - q"}, ()),
    "qpow2": (1, _qpow2, "Z", (), {0: "L - q*M^2"}, ()),
    "qtri": (1, _qtri, "Z", (), {0: "L - M"}, ()),
    "delta": (1, _delta, "Z", (), {0: "1 - M"}, ()),
    "heaviside": (1, _heaviside, "Z", (), {0: "(1 - q*M)*(L - 1)"}, ()),
    "qpoch": (1, _qpoch, "N", (), {0: "(1 - q*M)*L - (1 - q*M)^2"}, ()),
    "qpochinv": (1, _qpochinv, "N", (), {0: "(1 - q*M)*L - 1"}, ()),
    "xqpoch": (1, _xqpoch, "Z", ("x",), {0: "L + (x*M - 1)"}, ()),
    "delta2": (2, _delta2, "Z", (), {0: "M1 - M2", 1: "M1 - M2"}, ("L1*L2 - 1",)),
    "Fseq": (
        2,
        _Fseq,
        "Z",
        (),
        {0: "(M2 - q*M1)*L1 - M2 + q*M1*M2", 1: "(M2 - q*M2^2)*L2 - (1 - q*M2)*(M2 - M1)"},
        (),
    ),
    "Gseq": (
        2,
        _Gseq,
        "Z",
        (),
        {0: "(M2 - q*M1)*L1 - M2 + q*M1*M2", 1: "(M2 - q*M2^2)*L2 - M2 + M1"},
        (),
    ),
    "Hbin": (
        2,
        _Hbin,
        "Z",
        ("x",),
        {
            0: "(x^2*q^2*M1^2 - M2^2)*L1 - (x^2*q^2*M1^2*M2 - M2)",
            1: "(q^2*x*M1*M2^2 - x*M1)*L2 - (q*x^2*M1^2 - q*M2^2)",
        },
        (),
    ),
    "Kbin": (
        3,
        _Kbin,
        "Z",
        (),
        {
            0: "(q^2*M3^2*M1^2 - M2^2)*L1 - (q^2*M3^2*M1^2*M2 - M2)",
            1: "(q^2*M3*M1*M2^2 - M3*M1)*L2 - (q*M3^2*M1^2 - q*M2^2)",
            2: "(q^2*M3^2*M1^2 - M2^2)*L3 - (q^2*M3^2*M1^2*M2 - M2)",
        },
        (),
    ),
    "cex": (
        2,
        _cex,
        "Z",
        (),
        {0: "(q*M1 + M2 + 1)*L1 - (M1 + M2 + 1)", 1: "(M1 + q*M2 + 1)*L2 - (M1 + M2 + 1)"},
        (),
    ),
}

ALIASES = {"qbinom": "Gseq"}

ARITY = {name: spec[0] for name, spec in _SPECS.items()}
ARITY.update({a: ARITY[t] for a, t in ALIASES.items()})

DEFAULT_NAMES = {1: ("n",), 2: ("n", "k"), 3: ("n", "k", "l")}

_SUPPORT: dict[str, Callable[[], SupportSpec]] = {
    "delta": lambda: SupportSpec.finite(((0, 0),)),
    "delta2": lambda: SupportSpec(2, 1, bound=lambda m: ((m[0], m[0]),)),
}


def builtin_names() -> list[str]:
    return list(_SPECS)


@functools.lru_cache(maxsize=None)
def _system(name: str) -> AnnihilatorSystem:
    arity, _, _, params, dirs, extras = _SPECS[name]
    ops = {i: parse_operator(t, rank=arity) for i, t in dirs.items()}
    ex = tuple(parse_operator(t, rank=arity) for t in extras)
    return AnnihilatorSystem.make(arity, ops, ex, note=f"attached to builtin {name}")


@functools.lru_cache(maxsize=None)
def _builtin_cached(name: str, verify: bool) -> Sequence:
    arity, ev, conv, params, _, _ = _SPECS[name]
    seq = Sequence(
        arity,
        ev,
        names=DEFAULT_NAMES[arity],
        label=name,
        domain_convention=conv,
        support=_SUPPORT[name]() if name in _SUPPORT else None,
        system=_system(name),
        params=params,
    )
    if verify:
        box = ((-8, 8),) * arity if arity < 3 else ((-4, 4),) * arity
        seq = seq.with_system(seq.system.verify(seq, box))
    return seq


def builtin(name: str, *, verify: bool = True) -> Sequence:
    """Return the builtin sequence ``name`` with its annihilators attached.

    With ``verify`` (the default) the attached operators are checked on
    ``[-8, 8]^r`` (``[-4, 4]^3`` for ``Kbin``) and the system is marked
    window-verified.
    """
    name = ALIASES.get(name, name)
    if name not in _SPECS:
        raise UnknownBuiltin(f"unknown builtin {name!r}; known: {', '.join(sorted(_SPECS) + sorted(ALIASES))}")
    return _builtin_cached(name, verify)


BUILTINS = tuple(_SPECS)
