"""Creative telescoping for sums over one variable of a rank-2 summand.

A certificate is a pair ``(T, R)`` with

    T = sum_{j <= J} t_j(q, M_n) L_n^j,     R = sum_{j <= J} rho_j(q, M_n, M_k) L_n^j

such that ``(T - (L_k - 1) R) f = 0`` on a window.  Summing over ``k`` turns
``T`` into a recurrence for ``g(n) = sum_k f(n, k)`` up to the boundary
terms ``(R f)(n, b + 1) - (R f)(n, a)``.

The search expands every unknown polynomial coefficient into rational
unknowns per monomial ``q^e M_n^a M_k^b``, collects equations at window
points for several modular specializations of ``q``, and reconstructs the
canonical solution with the lowest-order telescoper (see
:mod:`qhol.modsolve`).  The reconstructed certificate is then re-checked
exactly, so a returned certificate never depends on the modular step.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

from .closure import positive_first
from .domains import EXACT
from .modsolve import ModularNullspace, integer_row
from .scalar import Scalar
from .sequence import Sequence, seq_affine
from .system import CLAIMED, WINDOW_VERIFIED, VerificationError, box_points
from .weyl import WeylOperator, weyl_apply

__all__ = [
    "TelescopingBounds",
    "TelescopingCertificate",
    "TelescopeNotFound",
    "TelescopeCheck",
    "telescope_search",
    "telescope_check",
    "DEFAULT_BOUNDS",
]


class TelescopeNotFound(LookupError):
    """No certificate exists within the given bounds (which says nothing beyond them)."""

    def __init__(self, bounds: "TelescopingBounds", detail: str = ""):
        msg = f"not found within bounds J={bounds.J}, degM={bounds.degM}, degQ={bounds.degQ}"
        super().__init__(msg + (f" ({detail})" if detail else ""))
        self.bounds = bounds


@dataclass(frozen=True)
class TelescopingBounds:
    J: int = 3
    degM: int = 4
    degQ: int = 6

    def __post_init__(self):
        if min(self.J, self.degM, self.degQ) < 0:
            raise ValueError("telescoping bounds must be non-negative")

    def doubled(self) -> "TelescopingBounds":
        return TelescopingBounds(max(1, 2 * self.J), max(1, 2 * self.degM), max(1, 2 * self.degQ))


DEFAULT_BOUNDS = TelescopingBounds()

# ansatz sizes beyond this are reported as not found rather than attempted
MAX_UNKNOWNS = 2400


@dataclass(frozen=True)
class TelescopingCertificate:
    """``(T - (L_k - 1) R) f = 0`` on ``window`` for the summation axis ``axis``."""

    axis: int
    T: WeylOperator
    R: WeylOperator
    window: tuple[tuple[int, int], ...]
    status: str = CLAIMED
    bounds: TelescopingBounds = field(default=DEFAULT_BOUNDS)

    def __post_init__(self):
        k = self.axis
        for (a, b), _ in self.T.items():
            if a[k] or b[k]:
                raise ValueError("the telescoper must not involve the summation variable")
        if self.T.is_zero():
            raise ValueError("the telescoper must be nonzero")

    def operator(self) -> WeylOperator:
        """``T - (L_k - 1) R`` as a rank-2 operator."""
        Lk = WeylOperator.L(self.axis, 2)
        return self.T - (Lk - 1) * self.R

    def sum_operator(self) -> WeylOperator:
        """``T`` as an operator on the surviving variable (rank 1)."""
        keep = 1 - self.axis
        terms = {((a[keep],), (b[keep],)): c for (a, b), c in self.T.items()}
        return WeylOperator(1, terms)

    def to_json(self, names=("n", "k")) -> dict:
        return {
            "axis": self.axis,
            "T": self.T.to_str(names),
            "R": self.R.to_str(names),
            "window": [list(w) for w in self.window],
            "status": self.status,
        }

    def dumps(self, names=("n", "k")) -> str:
        return json.dumps(self.to_json(names), sort_keys=True)


# -- search ---------------------------------------------------------------------


def _oriented(f: Sequence, axis: int) -> Sequence:
    """The summand with the summation variable last."""
    if f.rank != 2:
        raise ValueError("telescoping needs a rank-2 summand")
    if axis not in (0, 1):
        raise ValueError("axis must be 0 or 1")
    if axis == 1:
        return f
    return seq_affine(f, [[0, 1], [1, 0]], [0, 0], names=(f.names[1], f.names[0]))


def _default_window(bounds: TelescopingBounds, rank_needed: int) -> tuple[tuple[int, int], ...]:
    # enough points that a few specializations overdetermine the ansatz
    N = 10 + bounds.J
    return ((0, N), (-1, N + bounds.J + 1))


def _columns(bounds: TelescopingBounds):
    J, dm, dq = bounds.J, bounds.degM, bounds.degQ
    tcols = [(j, a, e) for j in range(J, -1, -1) for a in range(dm, -1, -1) for e in range(dq, -1, -1)]
    rcols = [
        (j, a, b, e)
        for j in range(J, -1, -1)
        for a in range(dm, -1, -1)
        for b in range(dm, -1, -1)
        for e in range(dq, -1, -1)
    ]
    return tcols, rcols


def _build(tcols, rcols, vec, nt):
    """Operators ``T``, ``R`` from a rational solution vector."""
    tt: dict = {}
    for (j, a, e), v in zip(tcols, vec[:nt]):
        if v:
            key = ((a, 0), (j, 0))
            tt[key] = tt.get(key, Scalar.from_int(0)) + Scalar.from_fraction(Fraction(v)) * Scalar.qpow(e)
    rr: dict = {}
    for (j, a, b, e), v in zip(rcols, vec[nt:]):
        if v:
            key = ((a, b), (j, 0))
            rr[key] = rr.get(key, Scalar.from_int(0)) + Scalar.from_fraction(Fraction(v)) * Scalar.qpow(e)
    return WeylOperator(2, tt), WeylOperator(2, rr)


def _residual_point(T: WeylOperator, R: WeylOperator, f, window, domain=EXACT):
    op = T - (WeylOperator.L(1, 2) - 1) * R
    for n in box_points(window):
        res = weyl_apply(op, f, n, domain)
        if not domain.is_zero(res):
            return n, res, op
    return None


def _search_once(f: Sequence, bounds: TelescopingBounds, window, seed: int):
    tcols, rcols = _columns(bounds)
    nt, ncols = len(tcols), len(tcols) + len(rcols)
    if ncols > MAX_UNKNOWNS:
        return None, f"ansatz has {ncols} unknowns, above the cap {MAX_UNKNOWNS}"
    pts = list(box_points(window))
    J, dm, dq = bounds.J, bounds.degM, bounds.degQ

    def batch(dom):
        p = dom.p
        q0 = dom.q0
        qe = [pow(q0, e, p) for e in range(dq + 1)]
        rows = []
        for n, k in pts:
            qn = [pow(q0, a * n, p) for a in range(dm + 1)]
            qk = [pow(q0, b * k, p) for b in range(dm + 1)]
            qk1 = [pow(q0, b * (k + 1), p) for b in range(dm + 1)]
            fv = [int(f.eval((n + j, k), dom)) for j in range(J + 1)]
            fv1 = [int(f.eval((n + j, k + 1), dom)) for j in range(J + 1)]
            row = []
            for j, a, e in tcols:
                row.append(qe[e] * qn[a] % p * fv[j] % p)
            for j, a, b, e in rcols:
                base = qe[e] * qn[a] % p
                row.append(base * (fv[j] * qk[b] - fv1[j] * qk1[b]) % p)
            rows.append(row)
        return rows

    solver = ModularNullspace(ncols, batch, params=(), seed=seed, min_batches=dq + 2)
    found: dict = {}

    def select(image):
        tpiv = [i for i, c in enumerate(image.pivots) if c < nt]
        # the last T-pivot row has the lowest leading telescoper monomial
        return [tpiv[-1]] if tpiv else []

    def accept(rows):
        ints = integer_row(rows[0])
        T, R = _build(tcols, rcols, ints, nt)
        if T.is_zero():
            return False
        if _residual_point(T, R, f, window) is not None:
            return False
        found["T"], found["R"] = T, R
        return True

    rows = solver.solve(select, accept)
    if not rows:
        return None, "no telescoper in the nullspace" if rows == [] else "reconstruction did not verify"
    return (found["T"], found["R"]), ""


def telescope_search(
    f: Sequence,
    bounds: TelescopingBounds = DEFAULT_BOUNDS,
    axis: int = 1,
    window=None,
    seed: int = 0,
    retry: bool = True,
) -> TelescopingCertificate:
    """Find a certificate for summing ``f`` over ``axis``.

    Raises :class:`TelescopeNotFound` when none exists within ``bounds``
    (and, with ``retry``, within the doubled bounds).
    """
    if f.params:
        raise ValueError("telescoping supports summands whose only parameter is q")
    g = _oriented(f, axis)
    attempts = [bounds] + ([bounds.doubled()] if retry else [])
    detail = ""
    for b in attempts:
        win = window if window is not None else _default_window(b, 2)
        result, detail = _search_once(g, b, win, seed)
        if result is not None:
            T, R = result
            if axis == 0:
                T, R = _swap(T), _swap(R)
            T, R = _normalize_pair(T, R)
            cert_window = tuple(win) if axis == 1 else (tuple(win[1]), tuple(win[0]))
            return TelescopingCertificate(axis, T, R, cert_window, WINDOW_VERIFIED, b)
    raise TelescopeNotFound(attempts[-1], detail)


def _swap(P: WeylOperator) -> WeylOperator:
    return WeylOperator(2, {((a[1], a[0]), (b[1], b[0])): c for (a, b), c in P.items()})


def _normalize_pair(T: WeylOperator, R: WeylOperator):
    Tn = positive_first(T)
    if Tn is not T and Tn != T:
        return Tn, -R
    return T, R


# -- checking -------------------------------------------------------------------


@dataclass
class TelescopeCheck:
    """Outcome of :func:`telescope_check`."""

    status: str
    recurrence: WeylOperator
    witness: tuple | None = None
    boundary: dict = field(default_factory=dict)
    checked: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.witness is None and not self.boundary

    def to_json(self) -> dict:
        return {
            "status": self.status,
            "recurrence": self.recurrence.to_str(),
            "witness": None if self.witness is None else [list(self.witness[0]), str(self.witness[1])],
            "boundary": {str(k): str(v) for k, v in self.boundary.items()},
            "checked": self.checked,
        }


def _Rf(cert: TelescopingCertificate, f: Sequence, n: int, k: int):
    point = (n, k) if cert.axis == 1 else (k, n)
    return weyl_apply(cert.R, f, point)


def telescope_check(
    f: Sequence,
    cert: TelescopingCertificate,
    window=None,
    mode: str = "natural",
    sum_range: Callable[[int], tuple[int, int]] | None = None,
    sum_window: tuple[int, int] | None = None,
) -> TelescopeCheck:
    """Re-verify a certificate and the recurrence it induces for the sum.

    ``natural``: ``g(n) = sum_{k=lo(n)}^{hi(n)} f(n, k)`` with ``sum_range``
    (default ``0..n``); the boundary terms are evaluated explicitly and must
    vanish, then ``T g = 0`` is checked directly on ``sum_window``.

    ``bounded``: checks ``T h(n, a, b) = (R f)(n, b + 1) - (R f)(n, a)`` for
    the rank-3 sequence of bounded sums, at every ``(n, a, b)`` with
    ``[a, b]`` inside the certificate window.
    """
    window = tuple(window) if window is not None else cert.window
    op = cert.operator()
    rec = cert.sum_operator()
    for n in box_points(window):
        res = weyl_apply(op, f, n)
        if not res.is_zero():
            return TelescopeCheck(CLAIMED, rec, witness=(n, res))
    keep = 1 - cert.axis
    nlo, nhi = window[keep]
    klo, khi = window[cert.axis]
    J = rec.l_degree(0)
    if mode == "bounded":
        checked = []
        for n in range(nlo, nhi + 1):
            for a in range(klo, khi + 1):
                for b in range(a - 1, khi + 1):
                    lhs = Scalar.from_int(0)
                    for (al, be), c in rec.items():
                        s = Scalar.from_int(0)
                        for k in range(a, b + 1):
                            pt = (n + be[0], k) if cert.axis == 1 else (k, n + be[0])
                            s = s + f(*pt)
                        lhs = lhs + c * Scalar.qpow(al[0] * n) * s
                    rhs = _Rf(cert, f, n, b + 1) - _Rf(cert, f, n, a)
                    if lhs != rhs:
                        return TelescopeCheck(CLAIMED, rec, witness=((n, a, b), lhs - rhs))
                    checked.append((n, a, b))
        return TelescopeCheck(WINDOW_VERIFIED, rec, checked=[len(checked)])
    if mode != "natural":
        raise ValueError("mode must be 'natural' or 'bounded'")
    rng = sum_range or (lambda n: (0, n))
    lo_w, hi_w = sum_window if sum_window is not None else (nlo, nhi - J)

    def g(n: int):
        lo, hi = rng(n)
        total = Scalar.from_int(0)
        for k in range(lo, hi + 1):
            total = total + (f(n, k) if cert.axis == 1 else f(k, n))
        return total

    boundary = {}
    checked = []
    for n in range(lo_w, hi_w + 1):
        ranges = [rng(n + j) for j in range(J + 1)]
        a = min(r[0] for r in ranges)
        b = max(r[1] for r in ranges)
        # summand must vanish where a shifted sum range does not reach
        for j, (lo, hi) in enumerate(ranges):
            for k in list(range(a, lo)) + list(range(hi + 1, b + 1)):
                v = f(n + j, k) if cert.axis == 1 else f(k, n + j)
                if not v.is_zero():
                    boundary[(n + j, k)] = v
        top, bottom = _Rf(cert, f, n, b + 1), _Rf(cert, f, n, a)
        if not top.is_zero():
            boundary[(n, b + 1)] = top
        if not bottom.is_zero():
            boundary[(n, a)] = bottom
        val = Scalar.from_int(0)
        for (al, be), c in rec.items():
            val = val + c * Scalar.qpow(al[0] * n) * g(n + be[0])
        if not val.is_zero():
            return TelescopeCheck(CLAIMED, rec, witness=((n,), val), boundary=boundary)
        checked.append(n)
    status = WINDOW_VERIFIED if not boundary else CLAIMED
    return TelescopeCheck(status, rec, boundary=boundary, checked=checked)
