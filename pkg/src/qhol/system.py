"""Annihilator systems: operators claimed or verified to kill a sequence."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence as Seq

from .domains import EXACT
from .scalar import Scalar
from .weyl import WeylOperator, weyl_apply

__all__ = [
    "AnnihilatorSystem",
    "VerificationError",
    "CLAIMED",
    "WINDOW_VERIFIED",
    "CERTIFIED",
    "box_points",
    "parse_window",
    "verify_operator",
]

CLAIMED = "claimed"
WINDOW_VERIFIED = "window-verified"
CERTIFIED = "certified"
_STATUS_RANK = {CLAIMED: 0, WINDOW_VERIFIED: 1, CERTIFIED: 2}

Box = tuple[tuple[int, int], ...]


class VerificationError(ArithmeticError):
    """An operator failed to annihilate a sequence; carries the witness."""

    def __init__(self, operator: WeylOperator, point: tuple[int, ...], residual):
        super().__init__(f"operator {operator} leaves residual {residual} at {point}")
        self.operator = operator
        self.point = point
        self.residual = residual


def box_points(box: Box) -> Iterable[tuple[int, ...]]:
    """All integer points of a box, lexicographic order."""
    return itertools.product(*(range(lo, hi + 1) for lo, hi in box))


def parse_window(text: str, rank: int) -> Box:
    """``"-4..8"`` (same range on every axis) or ``"0..5,-2..3"``."""
    parts = [p.strip() for p in text.split(",") if p.strip()]
    ranges = []
    for p in parts:
        if ".." not in p:
            raise ValueError(f"window component {p!r} must look like lo..hi")
        lo, hi = p.split("..", 1)
        ranges.append((int(lo), int(hi)))
    if len(ranges) == 1:
        ranges = ranges * rank
    if len(ranges) != rank:
        raise ValueError(f"window {text!r} does not have {rank} components")
    if any(lo > hi for lo, hi in ranges):
        raise ValueError(f"empty window {text!r}")
    return tuple(ranges)


def verify_operator(P: WeylOperator, f, box: Box, domain=EXACT) -> None:
    """Raise :class:`VerificationError` unless ``P f`` vanishes on ``box``."""
    for n in box_points(box):
        res = weyl_apply(P, f, n, domain)
        if not domain.is_zero(res):
            raise VerificationError(P, n, res)


@dataclass(frozen=True)
class AnnihilatorSystem:
    """Per-direction operators plus extra operators for a rank-``r`` sequence.

    ``directions[i]`` only involves ``L_i`` among the shift operators.
    """

    rank: int
    directions: tuple[tuple[int, WeylOperator], ...] = ()
    extras: tuple[WeylOperator, ...] = ()
    status: str = CLAIMED
    window: Box | None = None
    note: str = ""

    def __post_init__(self):
        dirs = tuple(sorted((int(i), P) for i, P in dict(self.directions).items()))
        object.__setattr__(self, "directions", dirs)
        object.__setattr__(self, "extras", tuple(self.extras))
        for i, P in dirs:
            if P.rank != self.rank:
                raise ValueError("operator rank does not match system rank")
            if P.is_zero():
                raise ValueError(f"direction {i} operator is zero")
            if not P.uses_only(range(self.rank), [i]):
                raise ValueError(f"direction {i} operator involves other shift operators: {P}")
        for P in self.extras:
            if P.rank != self.rank:
                raise ValueError("operator rank does not match system rank")
        if self.status not in _STATUS_RANK:
            raise ValueError(f"unknown status {self.status!r}")

    @classmethod
    def make(cls, rank: int, directions=None, extras=(), note: str = "") -> "AnnihilatorSystem":
        return cls(rank, tuple((directions or {}).items()), tuple(extras), CLAIMED, None, note)

    @property
    def direction_map(self) -> dict[int, WeylOperator]:
        return dict(self.directions)

    def direction(self, i: int) -> WeylOperator:
        try:
            return self.direction_map[i]
        except KeyError:
            raise KeyError(f"no operator for direction {i}") from None

    def has_direction(self, i: int) -> bool:
        return i in self.direction_map

    def is_rectangular(self) -> bool:
        return all(self.has_direction(i) for i in range(self.rank))

    def operators(self) -> list[WeylOperator]:
        return [P for _, P in self.directions] + list(self.extras)

    def order(self, i: int) -> int:
        return self.direction(i).l_degree(i)

    def leading_coefficient(self, i: int) -> dict[tuple[int, ...], Scalar]:
        """``L_i``-leading coefficient as a map ``alpha -> Scalar``."""
        P = self.direction(i)
        top = max(b[i] for (_, b), _c in P.items())
        return {a: c for (a, b), c in P.items() if b[i] == top}

    def at_least(self, status: str) -> bool:
        return _STATUS_RANK[self.status] >= _STATUS_RANK[status]

    def verify(self, f, box: Box, domain=EXACT) -> "AnnihilatorSystem":
        """Check every member on ``box``; returns a window-verified copy."""
        for P in self.operators():
            verify_operator(P, f, box, domain)
        status = self.status if self.at_least(CERTIFIED) else WINDOW_VERIFIED
        return replace(self, status=status, window=tuple(box))

    def with_direction(self, i: int, P: WeylOperator) -> "AnnihilatorSystem":
        d = self.direction_map
        d[i] = P
        return replace(self, directions=tuple(d.items()), status=CLAIMED, window=None)

    def to_json(self, names: Seq[str] | None = None) -> dict:
        return {
            "rank": self.rank,
            "directions": {str(i): P.to_str(names) for i, P in self.directions},
            "extras": [P.to_str(names) for P in self.extras],
            "status": self.status,
            "window": [list(w) for w in self.window] if self.window else None,
            "note": self.note,
        }
