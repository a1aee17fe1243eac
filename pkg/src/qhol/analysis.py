"""Theory-testing layer: dimension growth, finiteness and zero recognition.

The filtration ``F_k`` of the cyclic module ``T_{r,+} f`` is spanned by the
vectors ``M^alpha L^beta f`` with ``|alpha| + |beta| <= k``.  We measure
``dim F_k`` as the rank of these vectors restricted to a finite window of
points, either modulo a prime at a random specialization of ``q`` (a lower
bound for the true rank over ``k(q)``) or exactly by fraction-free
elimination.  The growth degree of ``k -> dim F_k`` is then read off from
finite differences.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import asdict, dataclass, field
from typing import Iterable, Sequence as Seq

import flint
import numpy as np

from .closure import ClosureError, closure_sum
from .domains import EXACT, PRIMES, random_modular_domain
from .guess import GuessConfig, GuessError, guess_annihilator
from .linalg import ModEchelon
from .scalar import ONE, ZERO, Scalar
from .sequence import Sequence
from .system import AnnihilatorSystem, VerificationError, verify_operator
from .weyl import WeylOperator

__all__ = [
    "WindowTooSmall",
    "DimensionReport",
    "filtration_monomials",
    "filtration_rank",
    "filtration_ranks",
    "dimension_estimate",
    "fit_degree",
    "FinitenessReport",
    "classify_finiteness",
    "SUITE_BOUNDS",
    "ProofResult",
    "prove_equal",
    "determining_set",
    "exceptional_points",
    "EQUAL_CLAIM",
    "NOT_EQUAL",
    "gaussian_binomial",
    "hk_display_rhs",
    "hk_corrected_rhs",
    "HK_CONVENTIONS",
    "HKResolution",
    "resolve_hk_convention",
]

Box = tuple[tuple[int, int], ...]

CONSISTENT = "consistent-with-q-holonomic"
EXCEEDS = "exceeds-holonomic-bound"
INCONCLUSIVE = "inconclusive"


class WindowTooSmall(ValueError):
    """The window has fewer points than there are filtration monomials."""


# -- filtration ranks ---------------------------------------------------------


def filtration_monomials(rank: int, k: int) -> list[tuple[tuple[int, ...], tuple[int, ...]]]:
    """Pairs ``(alpha, beta)`` with ``|alpha| + |beta| <= k``, by total degree."""
    out = []
    for deg in range(k + 1):
        for e in _compositions(deg, 2 * rank):
            out.append((e[:rank], e[rank:]))
    return out


def _compositions(total: int, parts: int) -> Iterable[tuple[int, ...]]:
    if parts == 1:
        yield (total,)
        return
    for first in range(total, -1, -1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def _monomial_count(rank: int, k: int) -> int:
    return math.comb(k + 2 * rank, 2 * rank)


def _box_size(box: Box) -> int:
    return math.prod(hi - lo + 1 for lo, hi in box)


def default_window(f: Sequence, K: int) -> Box:
    """Smallest cube with at least 1.5 times the degree-``K`` monomial count.

    Centered at the origin for sequences on ``Z^r`` and starting at zero
    for sequences on ``N^r``.
    """
    need = math.ceil(1.5 * _monomial_count(f.rank, K))
    side = 1
    while side**f.rank < need:
        side += 1
    if f.domain_convention == "N":
        return ((0, side - 1),) * f.rank
    lo = -(side // 2)
    return ((lo, lo + side - 1),) * f.rank


def _check_window(f: Sequence, K: int, window: Box) -> None:
    if len(window) != f.rank:
        raise ValueError("window rank does not match the sequence")
    need = _monomial_count(f.rank, K)
    have = _box_size(window)
    if have < need:
        raise WindowTooSmall(f"window has {have} points but degree {K} needs at least {need}")


def _modular_ranks(f: Sequence, K: int, window: Box, dom) -> list[int]:
    r = f.rank
    p = dom.p
    ext = tuple((lo, hi + K) for lo, hi in window)
    shape = tuple(hi - lo + 1 for lo, hi in ext)
    values = np.zeros(shape, dtype=np.int64)
    for idx in itertools.product(*(range(s) for s in shape)):
        n = tuple(lo + i for (lo, _), i in zip(ext, idx))
        values[idx] = int(f.eval(n, dom))
    wshape = tuple(hi - lo + 1 for lo, hi in window)
    qvec = []
    for i, (lo, hi) in enumerate(window):
        axis = np.array([int(dom.qpow(n)) for n in range(lo, hi + 1)], dtype=np.int64)
        shape_i = [1] * r
        shape_i[i] = wshape[i]
        qvec.append(np.broadcast_to(axis.reshape(shape_i), wshape).reshape(-1).copy())

    def base(beta):
        sl = tuple(slice(b, b + w) for b, w in zip(beta, wshape))
        return values[sl].reshape(-1)

    ech = ModEchelon(len(qvec[0]), p)
    rows: dict = {}
    ranks = []
    for deg in range(K + 1):
        batch = []
        for e in _compositions(deg, 2 * r):
            alpha, beta = e[:r], e[r:]
            if not any(alpha):
                row = base(beta)
            else:
                i = next(j for j, a in enumerate(alpha) if a)
                prev = alpha[:i] + (alpha[i] - 1,) + alpha[i + 1:]
                row = (rows[(prev, beta)] * qvec[i]) % p
            rows[(alpha, beta)] = row
            batch.append(row)
        if ech.rank < ech.ncols:
            ech.add_rows(np.array(batch, dtype=np.int64))
        ranks.append(ech.rank)
    return ranks


def _exact_column(values: list[Scalar]) -> list:
    """Scale a column of q-only Scalars to coprime integer polynomials."""
    den = None
    for v in values:
        d = v.denominator
        den = d if den is None else den * d / den.gcd(d)
    polys = []
    for v in values:
        num = v.numerator * (den / v.denominator)
        coeffs = [0] * (num.degrees()[0] + 1 if not num.is_zero() else 1)
        for e, c in num.to_dict().items():
            coeffs[e[0]] = int(c)
        polys.append(flint.fmpz_poly(coeffs))
    g = flint.fmpz_poly(0)
    for p in polys:
        if not p.is_zero():
            g = p if g.is_zero() else g.gcd(p)
    if not g.is_zero() and g != 1:
        polys = [p // g for p in polys]
    return polys


def _exact_ranks(f: Sequence, K: int, window: Box) -> list[int]:
    if f.params:
        raise ValueError("exact filtration ranks support sequences in q alone")
    r = f.rank
    points = list(itertools.product(*(range(lo, hi + 1) for lo, hi in window)))
    monos = filtration_monomials(r, K)
    table = []
    for alpha, beta in monos:
        row = []
        for n in points:
            v = f.eval(tuple(a + b for a, b in zip(n, beta)))
            e = sum(a * x for a, x in zip(alpha, n))
            row.append(v * Scalar.qpow(e) if e else v)
        table.append(row)
    columns = [_exact_column([table[i][j] for i in range(len(monos))]) for j in range(len(points))]
    matrix = [[columns[j][i] for j in range(len(points))] for i in range(len(monos))]
    echelon: list[tuple[int, list]] = []
    ranks = []
    it = iter(matrix)
    for deg in range(K + 1):
        for _ in range(_monomial_count(r, deg) - (_monomial_count(r, deg - 1) if deg else 0)):
            w = next(it)
            for piv, row in echelon:
                a = w[piv]
                if a.is_zero():
                    continue
                b = row[piv]
                w = [b * x - a * y for x, y in zip(w, row)]
                w = _poly_content_free(w)
            piv = next((j for j, x in enumerate(w) if not x.is_zero()), None)
            if piv is not None:
                echelon.append((piv, w))
        ranks.append(len(echelon))
    return ranks


def _poly_content_free(vec: list) -> list:
    g = None
    for x in vec:
        if x.is_zero():
            continue
        g = x if g is None else g.gcd(x)
        if g == 1:
            return vec
    if g is None or g == 1:
        return vec
    return [x // g for x in vec]


def filtration_ranks(
    f: Sequence,
    K: int,
    window: Box | None = None,
    mode: str = "probabilistic",
    trials: int = 3,
    seed: int = 0,
) -> list[int]:
    """``[dim F_0, ..., dim F_K]`` measured on ``window``.

    Probabilistic mode takes the maximum over ``trials`` random
    specializations modulo a word-size prime; it can only underestimate.
    Exact mode eliminates over ``Z[q]`` without fractions.
    """
    window = tuple(window) if window is not None else default_window(f, K)
    _check_window(f, K, window)
    if mode == "exact":
        return _exact_ranks(f, K, window)
    if mode != "probabilistic":
        raise ValueError(f"unknown rank mode {mode!r}")
    rng = random.Random(seed)
    best = [0] * (K + 1)
    done = 0
    failures = 0
    while done < trials:
        dom = random_modular_domain(rng, PRIMES[done % len(PRIMES)], f.params)
        try:
            ranks = _modular_ranks(f, K, window, dom)
        except ZeroDivisionError:
            # the specialization hit a pole of the sequence; draw another
            failures += 1
            if failures > 16:
                raise
            continue
        best = [max(a, b) for a, b in zip(best, ranks)]
        done += 1
    return best


def filtration_rank(f: Sequence, k: int, window: Box | None = None, mode: str = "probabilistic", trials: int = 3, seed: int = 0) -> int:
    """``dim F_k`` restricted to ``window``."""
    return filtration_ranks(f, k, window, mode, trials, seed)[k]


# -- degree fitting -------------------------------------------------------------


def _differences(values: Seq[int], order: int) -> list[int]:
    out = list(values)
    for _ in range(order):
        out = [b - a for a, b in zip(out, out[1:])]
    return out


def fit_degree(ranks: Seq[int], segment: int | None = None) -> tuple[int | None, int]:
    """Fit the growth degree of ``ranks`` on its top ``segment`` values.

    Returns ``(degree, lower_bound)``.  ``degree`` is the smallest ``d``
    whose ``(d+1)``-th differences vanish on the segment, or ``None`` when
    the segment is too short to see it.  ``lower_bound`` is the largest
    ``m`` whose ``m``-th differences are all positive on the segment.
    """
    segment = segment or math.ceil(len(ranks) / 2)
    top = list(ranks[-segment:])
    degree = None
    for d in range(len(top) - 1):
        if all(v == 0 for v in _differences(top, d + 1)):
            degree = d
            break
    lower = 0
    for m in range(1, len(top)):
        diffs = _differences(top, m)
        if diffs and all(v > 0 for v in diffs):
            lower = m
        else:
            break
    if degree is not None:
        lower = min(lower, degree)
    return degree, lower


@dataclass
class DimensionReport:
    """Measured filtration ranks and the growth verdict."""

    rank: int
    ranks: list[int]
    degree: int | None
    degree_lower_bound: int
    verdict: str
    window: Box
    K: int
    segment: int
    mode: str
    trials: int
    seed: int
    label: str = ""

    @property
    def degree_estimate(self) -> int:
        return self.degree if self.degree is not None else self.degree_lower_bound

    def to_json(self) -> dict:
        d = asdict(self)
        d["window"] = [list(w) for w in self.window]
        return d


def dimension_estimate(
    f: Sequence,
    K: int | None = None,
    window: Box | None = None,
    mode: str = "probabilistic",
    trials: int = 3,
    seed: int = 0,
) -> DimensionReport:
    """Estimate the Hilbert dimension of ``T_{r,+} f`` from rank growth."""
    r = f.rank
    K = 2 * r + 6 if K is None else K
    if K < r + 2:
        raise ValueError(f"K must be at least r + 2 = {r + 2}")
    window = tuple(window) if window is not None else default_window(f, K)
    ranks = filtration_ranks(f, K, window, mode, trials, seed)
    segment = math.ceil(K / 2)
    degree, lower = fit_degree(ranks, segment)
    if ranks[-1] >= _box_size(window):
        verdict = INCONCLUSIVE  # the window itself caps the rank
    elif degree is not None:
        verdict = CONSISTENT if degree <= r else EXCEEDS
    elif lower > r:
        verdict = EXCEEDS
    else:
        verdict = INCONCLUSIVE
    return DimensionReport(r, ranks, degree, lower, verdict, window, K, segment, mode, trials, seed, f.label)


# -- finiteness hierarchy -----------------------------------------------------

SUITE_BOUNDS = GuessConfig(order=1, mdeg=2, qdeg=2)
FOUND = "found"
NOT_FOUND = "not-found-within-bounds"


def _has_unit_leading_coefficient(P: WeylOperator, i: int) -> bool:
    """True when the ``L_i``-leading coefficient is a scalar times an M monomial."""
    top = max(b[i] for (_, b), _c in P.items())
    alphas = {a for (a, b), _c in P.items() if b[i] == top}
    return len(alphas) == 1


def _generator_label(names: Seq[str], m_vars, l_vars) -> str:
    return ",".join([f"M_{names[i]}" for i in sorted(m_vars)] + [f"L_{names[i]}" for i in sorted(l_vars)])


def _vanishes_on(f: Sequence, box: Box) -> bool:
    return all(f.eval(n).is_zero() for n in itertools.product(*(range(lo, hi + 1) for lo, hi in box)))


@dataclass
class FinitenessReport:
    """Bounded-search evidence for the three finiteness properties."""

    integrally_finite: bool
    finite: bool
    strongly_finite: dict[str, str]
    directions: dict[str, dict]
    bounds: dict
    label: str = ""

    @property
    def strongly_finite_evidence(self) -> bool:
        return all(v == FOUND for v in self.strongly_finite.values())

    def to_json(self) -> dict:
        return {
            "integrally_finite": self.integrally_finite,
            "finite": self.finite,
            "strongly_finite": dict(self.strongly_finite),
            "strongly_finite_evidence": self.strongly_finite_evidence,
            "directions": self.directions,
            "bounds": self.bounds,
            "label": self.label,
        }


def classify_finiteness(f: Sequence, cfg: GuessConfig | None = None, system: AnnihilatorSystem | None = None) -> FinitenessReport:
    """Report integral finiteness, finiteness and strong-finiteness evidence.

    Direction operators come from ``system`` (or the one attached to ``f``)
    when it verifies on the guessing window, and from bounded guessing.
    Strong finiteness is searched for every ``(r+1)``-element subset of the
    generators ``M_1..M_r, L_1..L_r``.  Absence is reported, never raised.
    """
    cfg = cfg or SUITE_BOUNDS
    r = f.rank
    names = f.names
    _, ver = cfg.resolved(f)
    bounds = {"order": cfg.order, "mdeg": cfg.mdeg, "qdeg": cfg.qdeg}
    gens = [("M", i) for i in range(r)] + [("L", i) for i in range(r)]
    subsets = list(itertools.combinations(gens, r + 1))
    if _vanishes_on(f, ver):
        strongly = {
            _generator_label(names, [i for t, i in s if t == "M"], [i for t, i in s if t == "L"]): FOUND for s in subsets
        }
        dirs = {names[i]: {"operators": ["1"], "monic": True} for i in range(r)}
        return FinitenessReport(True, True, strongly, dirs, bounds, f.label)
    system = system if system is not None else f.system
    directions: dict[str, dict] = {}
    found_dir: dict[int, bool] = {}
    monic_dir: dict[int, bool] = {}
    for i in range(r):
        candidates: list[WeylOperator] = []
        if system is not None and system.has_direction(i):
            P = system.direction(i)
            try:
                verify_operator(P, f, ver)
                candidates.append(P)
            except VerificationError:
                pass
        try:
            candidates.extend(guess_annihilator(f, cfg.with_gens(range(r), [i])))
        except GuessError:
            pass
        candidates = list(dict.fromkeys(candidates))
        found_dir[i] = bool(candidates)
        monic_dir[i] = any(_has_unit_leading_coefficient(P, i) for P in candidates)
        directions[names[i]] = {"operators": [P.to_str(names) for P in candidates], "monic": monic_dir[i]}
    strongly: dict[str, str] = {}
    for s in subsets:
        m_vars = [i for t, i in s if t == "M"]
        l_vars = [i for t, i in s if t == "L"]
        label = _generator_label(names, m_vars, l_vars)
        if len(m_vars) == r and len(l_vars) == 1:
            strongly[label] = FOUND if found_dir[l_vars[0]] else NOT_FOUND
            continue
        try:
            ops = guess_annihilator(f, cfg.with_gens(m_vars, l_vars))
        except GuessError:
            ops = []
        strongly[label] = FOUND if ops else NOT_FOUND
    finite = all(found_dir.values())
    integrally = finite and all(monic_dir.values())
    return FinitenessReport(integrally, finite, strongly, directions, bounds, f.label)


# -- zero recognition ------------------------------------------------------------

EQUAL_CLAIM = "equal-modulo-annihilator-claim"
NOT_EQUAL = "not-equal"


def _q_order(c: Scalar) -> int:
    def low(poly):
        return min(int(e[0]) for e in poly.to_dict())

    return low(c.numerator) - low(c.denominator)


def _coefficient_polys(P: WeylOperator) -> dict[int, dict[int, Scalar]]:
    """``j -> {a: c}`` so that ``(P h)(n) = sum_j sum_a c q^{a n} h(n + j)``."""
    out: dict[int, dict[int, Scalar]] = {}
    for (a, b), c in P.items():
        out.setdefault(b[0], {})[a[0]] = c
    return out


def _vanishing_points(poly: dict[int, Scalar]) -> list[int]:
    """Integers ``m`` with ``sum_a c_a q^{a m} = 0`` identically.

    At such ``m`` the lowest q-order must be reached by two terms, which
    leaves finitely many candidates; each is checked exactly.
    """
    terms = [(a, c, _q_order(c)) for a, c in poly.items()]
    cands = set()
    for (a1, _, o1), (a2, _, o2) in itertools.combinations(terms, 2):
        if (o1 - o2) % (a2 - a1) == 0:
            cands.add((o1 - o2) // (a2 - a1))
    out = []
    for m in sorted(cands):
        total = ZERO
        for a, c, _ in terms:
            total = total + c * Scalar.qpow(a * m)
        if total.is_zero():
            out.append(m)
    return out


def exceptional_points(P: WeylOperator) -> tuple[list[int], list[int]]:
    """Where the leading and the trailing coefficient of ``P`` vanish."""
    if P.rank != 1:
        raise ValueError("exceptional points are computed for one variable")
    P = P.normalize_l()
    polys = _coefficient_polys(P)
    d = max(polys)
    return _vanishing_points(polys[d]), _vanishing_points(polys[0])


def determining_set(P: WeylOperator, anchor: int = 0) -> list[int]:
    """Points on which a solution of ``P h = 0`` on ``Z`` is determined.

    The initial block ``anchor .. anchor + d - 1`` plus every value that
    the forward or backward recursion cannot produce because the leading
    or trailing coefficient vanishes.
    """
    P = P.normalize_l()
    d = P.l_degree(0)
    lead, trail = exceptional_points(P)
    S = set(range(anchor, anchor + d))
    S.update(m + d for m in lead if m >= anchor)
    S.update(m for m in trail if m < anchor)
    return sorted(S)


@dataclass
class ProofResult:
    """Outcome of :func:`prove_equal`."""

    status: str
    operator: WeylOperator
    points: list[int]
    window: Box
    witness: tuple[int, Scalar, Scalar] | None = None
    note: str = ""

    @property
    def equal(self) -> bool:
        return self.status == EQUAL_CLAIM

    def to_json(self, names: Seq[str] | None = None) -> dict:
        out = {
            "status": self.status,
            "operator": self.operator.to_str(names),
            "points": list(self.points),
            "window": [list(w) for w in self.window],
            "note": self.note,
        }
        if self.witness is not None:
            n, a, b = self.witness
            out["witness"] = {"point": n, "left": str(a), "right": str(b)}
        return out


def _system_for(f: Sequence, cfg: GuessConfig) -> AnnihilatorSystem:
    if f.system is not None and f.system.is_rectangular():
        return f.system
    from .guess import guess_system

    return guess_system(f, cfg)


def prove_equal(
    f: Sequence,
    g: Sequence,
    sys: AnnihilatorSystem | None = None,
    S: Iterable[int] | None = None,
    window: Box | None = None,
    cfg: GuessConfig | None = None,
) -> ProofResult:
    """Decide ``f = g`` from a shared annihilator and a finite determining set.

    Without ``sys`` a common annihilator is built from the systems of ``f``
    and ``g`` (attached or guessed).  The shared operator is checked on
    ``window`` for both sequences; equality on the determining set then
    yields the status ``equal-modulo-annihilator-claim``, conditional on
    the operator annihilating both sequences everywhere.  A mismatch is an
    unconditional witness.
    """
    if f.rank != 1 or g.rank != 1:
        raise ValueError("prove_equal is implemented for sequences of one variable")
    window = tuple(window) if window is not None else ((-6, 10),)
    if sys is None:
        cfg = cfg or GuessConfig()
        try:
            P = closure_sum(_system_for(f, cfg), _system_for(g, cfg), 0)
        except (ClosureError, GuessError) as exc:
            raise ValueError(f"no shared annihilator: {exc}") from None
        note = "shared operator built from the systems of both sequences"
    else:
        P = sys.direction(0)
        note = "shared operator supplied by the caller"
    for h, which in ((f, "first"), (g, "second")):
        try:
            verify_operator(P, h, window)
        except VerificationError as exc:
            raise ValueError(f"the shared operator does not annihilate the {which} sequence at {exc.point}") from None
    required = determining_set(P)
    if S is not None:
        given = sorted(set(int(m) for m in S))
        missing = sorted(set(required) - set(given))
        if missing:
            raise ValueError(f"the point set misses required points {missing}")
        points = given
    else:
        points = required
    for m in points:
        a, b = f.eval((m,)), g.eval((m,))
        if a != b:
            return ProofResult(NOT_EQUAL, P, points, window, (m, a, b), "values differ; this witness is unconditional")
    shown = ",".join(f"{lo}..{hi}" for lo, hi in window)
    note += f"; equality holds if the operator annihilates both sequences on all of Z (checked on {shown})"
    return ProofResult(EQUAL_CLAIM, P, points, window, None, note)


# -- the extended q-binomial identity -------------------------------------------


def gaussian_binomial(k: int, j: int, base: int = 1) -> Scalar:
    """``[k choose j]`` in the variable ``q^base`` (zero outside ``0..k``)."""
    if j < 0 or j > k:
        return ZERO
    out = ONE
    for i in range(1, j + 1):
        out = out * (ONE - Scalar.qpow(base * (k - j + i))) / (ONE - Scalar.qpow(base * i))
    return out


def _bracket(k: int, j: int, convention: str) -> Scalar:
    std = gaussian_binomial(k, j, 2)
    if convention == "standard":
        return std
    if convention == "balanced":
        return std * Scalar.qpow(-j * (k - j))
    if convention == "inverse":
        return gaussian_binomial(k, j, -2)
    raise ValueError(f"unknown bracket convention {convention!r}")


HK_CONVENTIONS = ("standard", "balanced", "inverse")


def _qpoch(k: int, base: int = 1) -> Scalar:
    out = ONE
    for i in range(1, k + 1):
        out = out * (ONE - Scalar.qpow(base * i))
    return out


def hk_display_rhs(n: int, k: int, convention: str = "standard") -> Scalar:
    """Right side of the displayed expansion of the extended q-binomial.

    ``(-1)^k (q - q^-1)^k q^{k(k-1)} / (q;q)_k
    * sum_j (-1)^j q^{2nj - 3kj + j} [k, j] x^{2j}`` with the bracket read
    in the given convention.
    """
    x = Scalar.param("x")
    q = Scalar.q()
    pre = Scalar.from_int((-1) ** k) * (q - q.inverse()) ** k * Scalar.qpow(k * (k - 1)) / _qpoch(k)
    total = ZERO
    for j in range(k + 1):
        total = total + Scalar.from_int((-1) ** j) * Scalar.qpow(2 * n * j - 3 * k * j + j) * _bracket(k, j, convention) * x ** (2 * j)
    return pre * total


def hk_corrected_rhs(n: int, k: int) -> Scalar:
    """An expansion of the extended q-binomial that does hold.

    ``q^{k^2 - kn} x^{-k} / (q^2;q^2)_k
    * sum_j (-1)^j q^{j^2 + j + 2nj - 2kj} [k, j]_{q^2} x^{2j}``, obtained
    by expanding the product with the Gauss binomial formula in base ``q^2``.
    """
    x = Scalar.param("x")
    pre = Scalar.qpow(k * k - k * n) * x ** (-k) / _qpoch(k, 2)
    total = ZERO
    for j in range(k + 1):
        total = total + Scalar.from_int((-1) ** j) * Scalar.qpow(j * j + j + 2 * n * j - 2 * k * j) * gaussian_binomial(k, j, 2) * x ** (2 * j)
    return pre * total


@dataclass
class HKResolution:
    """Brute-force comparison of bracket conventions against the product."""

    matching: list[str]
    witnesses: dict[str, tuple[int, int]]
    corrected_holds: bool
    nmax: int

    def to_json(self) -> dict:
        return {
            "matching": self.matching,
            "witnesses": {k: list(v) for k, v in self.witnesses.items()},
            "corrected_holds": self.corrected_holds,
            "nmax": self.nmax,
        }


def resolve_hk_convention(nmax: int = 4) -> HKResolution:
    """Compare every bracket convention with the product on ``0 <= k <= n <= nmax``."""
    from .catalog import builtin

    H = builtin("Hbin", verify=False)
    pairs = [(n, k) for n in range(nmax + 1) for k in range(n + 1)]
    values = {nk: H.eval(nk) for nk in pairs}
    matching, witnesses = [], {}
    for conv in HK_CONVENTIONS:
        bad = next((nk for nk in pairs if hk_display_rhs(*nk, conv) != values[nk]), None)
        if bad is None:
            matching.append(conv)
        else:
            witnesses[conv] = bad
    corrected = all(hk_corrected_rhs(*nk) == values[nk] for nk in pairs)
    return HKResolution(matching, witnesses, corrected, nmax)
