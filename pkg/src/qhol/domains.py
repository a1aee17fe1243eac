"""Evaluation domains for sequences and operators.

Every builtin and combinator is written once against the small interface
below.  Two domains exist:

``EXACT``
    values are :class:`~qhol.scalar.Scalar` rational functions.
``ModularDomain(p, q0, params)``
    values are ``flint.nmod`` residues obtained by specializing ``q`` and the
    parameters to random residues mod a word-size prime.  Used by the
    guessing and rank code, where every answer is re-verified exactly or
    is only claimed with probabilistic confidence.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Mapping

import flint

from .scalar import ONE, ZERO, PoleError, Scalar

__all__ = ["ExactDomain", "ModularDomain", "EXACT", "PRIMES", "random_modular_domain"]

# primes below 2**31 so that products of two residues fit in 63 bits
PRIMES = (2147483647, 2147483629, 2147483587, 2147483579, 2147483563, 2147483549)


class ExactDomain:
    """Values are Scalars; nothing is lost."""

    key = "exact"
    exact = True
    one = ONE
    zero = ZERO

    def qpow(self, e: int) -> Scalar:
        return Scalar.qpow(e)

    def param(self, name: str) -> Scalar:
        return Scalar.param(name)

    def coerce(self, s: Scalar) -> Scalar:
        return s

    def from_int(self, v: int) -> Scalar:
        return Scalar.from_int(v)

    def is_zero(self, a) -> bool:
        return a.is_zero()

    def rescaled(self, c: int) -> "ExactDomain":
        return self

    def __hash__(self) -> int:
        return hash("exact")

    def __eq__(self, other) -> bool:
        return isinstance(other, ExactDomain)

    def __repr__(self) -> str:
        return "EXACT"


EXACT = ExactDomain()


@dataclass(frozen=True)
class ModularDomain:
    """Specialization ``q -> q0``, ``x -> x0`` in ``Z/p``."""

    p: int
    q0: int
    params: tuple[tuple[str, int], ...] = ()

    exact = False

    def __post_init__(self):
        if self.q0 % self.p in (0, 1, self.p - 1):
            raise ValueError("q0 must avoid 0 and +-1")
        object.__setattr__(self, "params", tuple(sorted(self.params)))

    @property
    def key(self):
        return (self.p, self.q0, self.params)

    @property
    def one(self):
        return flint.nmod(1, self.p)

    @property
    def zero(self):
        return flint.nmod(0, self.p)

    def qpow(self, e: int):
        return flint.nmod(pow(self.q0, int(e), self.p), self.p)

    def param(self, name: str):
        for n, v in self.params:
            if n == name:
                return flint.nmod(v, self.p)
        raise KeyError(f"parameter {name!r} is not specialized in this domain")

    def param_map(self) -> Mapping[str, int]:
        return dict(self.params)

    def coerce(self, s: Scalar):
        try:
            return flint.nmod(s.eval_mod(self.p, self.q0, self.param_map()), self.p)
        except KeyError as exc:
            raise KeyError(f"{exc.args[0]} (needed by {s})") from None

    def from_int(self, v: int):
        return flint.nmod(v, self.p)

    def is_zero(self, a) -> bool:
        return int(a) == 0

    def rescaled(self, c: int) -> "ModularDomain":
        """The domain realizing ``q -> q**c`` on top of this one."""
        return ModularDomain(self.p, pow(self.q0, int(c), self.p), self.params)


def random_modular_domain(rng: random.Random, p: int, params: tuple[str, ...] = ()) -> ModularDomain:
    """Draw a specialization avoiding small roots of unity for ``q``."""
    while True:
        q0 = rng.randrange(2, p - 1)
        # avoid q0 of small multiplicative order; such points collapse q^n
        if all(pow(q0, k, p) != 1 for k in range(1, 64)):
            break
    values = tuple((name, rng.randrange(2, p - 1)) for name in params)
    return ModularDomain(p, q0, values)


__all__ += ["PoleError"]
