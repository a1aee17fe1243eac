"""Command-line front end: ``qhol <command> ...``.

Exit codes: 0 success or verified, 1 mathematical negative (a mismatch
witness or nothing found within bounds), 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from typing import Sequence as Seq

from . import __version__
from .analysis import classify_finiteness, dimension_estimate, prove_equal
from .closure import DEFAULT_CLOSURE_WINDOW, ClosureError, closed_affine, closed_mul, closed_sum
from .dsl import DslError, Subst, _Compiler, compile_text, parse
from .fourier import SeriesOverflow, fourier_truncate, hadamard, series_mul, series_op
from .guess import GuessConfig, GuessError, guess_annihilator, guess_system, parse_gens
from .sequence import Sequence
from .system import VerificationError, box_points, parse_window
from .telescope import TelescopeNotFound, TelescopingBounds, telescope_check, telescope_search
from .textparse import ParseError
from .weyl import WeylOperator, parse_operator, weyl_apply

try:  # Python 3.11+
    import tomllib
except ModuleNotFoundError:  # pragma: no cover - depends on the interpreter
    import tomli as tomllib

__all__ = ["main", "build_parser", "SessionConfig", "load_config"]

SCHEMA = "qhol/1"
EXIT_OK, EXIT_NEGATIVE, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    """Bad command-line input; rendered with exit code 2."""


# -- session configuration ---------------------------------------------------


@dataclass
class SessionConfig:
    """Settings merged from a config file and explicit flags."""

    params: tuple[str, ...] = ()
    window: str | None = None
    seed: int = 0
    output: str = "human"
    guess: dict = field(default_factory=dict)
    telescope: dict = field(default_factory=dict)


def load_config(path: str | None) -> SessionConfig:
    """Read a TOML file with keys ``params``, ``window``, ``seed``,
    ``output`` and tables ``[guess]`` and ``[telescope]``."""
    if not path:
        return SessionConfig()
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except OSError as exc:
        raise UsageError(f"cannot read config file: {exc}") from None
    except tomllib.TOMLDecodeError as exc:
        raise UsageError(f"config file {path}: {exc}") from None
    known = {"params", "window", "seed", "output", "guess", "telescope"}
    unknown = set(data) - known
    if unknown:
        raise UsageError(f"config file {path}: unknown keys {sorted(unknown)}")
    params = data.get("params", ())
    if isinstance(params, str):
        params = [p for p in params.split(",") if p.strip()]
    output = data.get("output", "human")
    if output not in ("human", "json"):
        raise UsageError("config output must be 'human' or 'json'")
    return SessionConfig(
        params=tuple(p.strip() for p in params),
        window=data.get("window"),
        seed=int(data.get("seed", 0)),
        output=output,
        guess=dict(data.get("guess", {})),
        telescope=dict(data.get("telescope", {})),
    )


def _merge(args) -> SessionConfig:
    cfg = load_config(args.config)
    if args.params is not None:
        cfg.params = tuple(p.strip() for p in args.params.split(",") if p.strip())
    if args.seed is not None:
        cfg.seed = args.seed
    if args.json:
        cfg.output = "json"
    if getattr(args, "window", None):
        cfg.window = args.window
    return cfg


# -- helpers -----------------------------------------------------------------------


def _vars(args) -> list[str] | None:
    if not args.vars:
        return None
    names = [v.strip() for v in args.vars.split(",") if v.strip()]
    if not names:
        raise UsageError("--vars needs at least one name")
    return names


def _compile(text: str, args, cfg: SessionConfig) -> Sequence:
    return compile_text(text, _vars(args), cfg.params)


def _op_text(P: WeylOperator, names: Seq[str]) -> str:
    return P.to_str() if P.rank == 1 else P.to_str(names)


def _point_text(names: Seq[str], n: Seq[int]) -> str:
    return ", ".join(f"{a}={b}" for a, b in zip(names, n))


def _window(cfg: SessionConfig, rank: int, default: str | None = None):
    text = cfg.window or default
    if text is None:
        return None
    try:
        return parse_window(text, rank)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _guess_config(args, cfg: SessionConfig, f: Sequence) -> GuessConfig:
    opts = dict(cfg.guess)
    for key in ("order", "mdeg", "qdeg", "pdeg"):
        v = getattr(args, key, None)
        if v is not None:
            opts[key] = v
    allowed = {"order", "mdeg", "qdeg", "pdeg"}
    if set(opts) - allowed:
        raise UsageError(f"unknown guess settings {sorted(set(opts) - allowed)}")
    gc = GuessConfig(seed=cfg.seed, **{k: int(v) for k, v in opts.items()})
    if getattr(args, "gens", None):
        m, l = parse_gens(args.gens, f.names)
        gc = gc.with_gens(m, l)
    if cfg.window:
        from dataclasses import replace

        gc = replace(gc, window=_window(cfg, f.rank))
    return gc


class _Out:
    """Collects human lines and a JSON payload; prints one of them."""

    def __init__(self, command: str, cfg: SessionConfig):
        self.command = command
        self.json = cfg.output == "json"
        self.lines: list[str] = []
        self.payload: dict = {"schema": SCHEMA, "command": command}

    def line(self, text: str = "") -> None:
        self.lines.append(text)

    def emit(self) -> None:
        if self.json:
            print(json.dumps(self.payload, indent=2, sort_keys=True))
        else:
            for ln in self.lines:
                print(ln)


# -- commands ------------------------------------------------------------------------


def cmd_eval(args, cfg: SessionConfig, out: _Out) -> int:
    f = _compile(args.expr, args, cfg)
    points = []
    for spec in args.at or ():
        values = {}
        for part in spec.split(","):
            if "=" not in part:
                raise UsageError(f"--at expects name=value pairs, got {part!r}")
            k, v = part.split("=", 1)
            values[k.strip()] = int(v)
        missing = [v for v in f.names if v not in values]
        extra = [k for k in values if k not in f.names]
        if missing or extra:
            raise UsageError(f"--at must give exactly the variables {', '.join(f.names)}")
        points.append(tuple(values[v] for v in f.names))
    if not points:
        box = _window(cfg, f.rank)
        if box is None:
            raise UsageError("give --at or --window")
        points = list(box_points(box))
    results = [(n, f.eval(n)) for n in points]
    out.payload.update(variables=list(f.names), values=[{"point": list(n), "value": str(v)} for n, v in results])
    if len(results) == 1 and args.at:
        out.line(str(results[0][1]))
    else:
        for n, v in results:
            out.line(f"{_point_text(f.names, n)}: {v}")
    return EXIT_OK


def cmd_guess(args, cfg: SessionConfig, out: _Out) -> int:
    f = _compile(args.expr, args, cfg)
    gc = _guess_config(args, cfg, f)
    ops = guess_annihilator(f, gc)
    ev, ver = gc.resolved(f)
    texts = [_op_text(P, f.names) for P in ops]
    out.payload.update(
        variables=list(f.names),
        operators=texts,
        bounds={"order": gc.order, "mdeg": gc.mdeg, "qdeg": gc.qdeg, "pdeg": gc.pdeg},
        window=[list(w) for w in ev],
        verify_window=[list(w) for w in ver],
        status="window-verified" if ops else "not-found-within-bounds",
    )
    if not ops:
        out.line(f"no operator found within order {gc.order}, M-degree {gc.mdeg}, q-degree {gc.qdeg}")
        return EXIT_NEGATIVE
    for t in texts:
        out.line(t)
    return EXIT_OK


def cmd_verify(args, cfg: SessionConfig, out: _Out) -> int:
    f = _compile(args.expr, args, cfg)
    try:
        P = parse_operator(args.op, names=f.names if f.rank > 1 else None, rank=f.rank, params=set(cfg.params) | set(f.params))
    except ParseError as exc:
        raise UsageError(f"operator: {exc}") from None
    box = _window(cfg, f.rank, "%d..%d" % DEFAULT_CLOSURE_WINDOW)
    residuals = []
    ok = True
    for n in box_points(box):
        res = weyl_apply(P, f, n)
        ok = ok and res.is_zero()
        residuals.append((n, res))
        out.line(f"{_point_text(f.names, n)}: {res}")
    out.payload.update(
        operator=_op_text(P, f.names),
        variables=list(f.names),
        window=[list(w) for w in box],
        residuals=[{"point": list(n), "residual": str(r)} for n, r in residuals],
        verified=ok,
    )
    out.line("all residuals vanish" if ok else "nonzero residuals")
    return EXIT_OK if ok else EXIT_NEGATIVE


def _with_system(f: Sequence, args, cfg: SessionConfig) -> Sequence:
    if f.system is not None and f.system.is_rectangular():
        return f
    return f.with_system(guess_system(f, _guess_config(args, cfg, f)))


def _system_lines(out: _Out, h: Sequence) -> None:
    sys_ = h.system
    for i, P in sys_.directions:
        out.line(f"{h.names[i]}: {_op_text(P, h.names)}")
    out.line(f"status: {sys_.status} on {list(map(list, sys_.window))}")
    out.payload.update(
        variables=list(h.names),
        directions={h.names[i]: _op_text(P, h.names) for i, P in sys_.directions},
        status=sys_.status,
        window=[list(w) for w in sys_.window],
    )


def cmd_closure(args, cfg: SessionConfig, out: _Out) -> int:
    out.payload["operation"] = args.operation
    if args.operation in ("sum", "mul"):
        if len(args.exprs) != 2:
            raise UsageError(f"closure {args.operation} takes two expressions")
        f = _with_system(_compile(args.exprs[0], args, cfg), args, cfg)
        g = _with_system(_compile(args.exprs[1], args, cfg), args, cfg)
        if f.names != g.names:
            raise UsageError("both expressions must use the same variables; pass --vars")
        window = _window(cfg, f.rank)
        h = (closed_sum if args.operation == "sum" else closed_mul)(f, g, window)
    else:
        if len(args.exprs) != 1 or not args.map:
            raise UsageError("closure subst takes one expression and --map")
        f = _with_system(_compile(args.exprs[0], args, cfg), args, cfg)
        new_vars = [v.strip() for v in (args.to or ",".join(f.names)).split(",") if v.strip()]
        try:
            tree = parse(f"subst(0; {args.map})")
        except DslError as exc:
            raise UsageError(f"--map: {exc}") from None
        assert isinstance(tree, Subst)
        comp = _Compiler(cfg.params)
        mapping = {v: comp.affine(e, new_vars) for v, e in tree.pairs}
        A, b = [], []
        for v in f.names:
            if v in mapping:
                coeffs, c = mapping[v]
            elif v in new_vars:
                coeffs, c = [int(w == v) for w in new_vars], 0
            else:
                raise UsageError(f"--map must give an image for {v!r}")
            A.append(coeffs)
            b.append(c)
        h = closed_affine(f, A, b, names=new_vars, window=_window(cfg, len(new_vars)))
    _system_lines(out, h)
    return EXIT_OK


def cmd_telescope(args, cfg: SessionConfig, out: _Out) -> int:
    f = _compile(args.expr, args, cfg)
    if f.rank != 2:
        raise UsageError("telescope needs a summand in two variables")
    axis = f.rank - 1 if args.axis is None else (list(f.names).index(args.axis) if args.axis in f.names else -1)
    if axis < 0:
        raise UsageError(f"--axis must be one of {', '.join(f.names)}")
    opts = dict(cfg.telescope)
    for key in ("J", "degM", "degQ"):
        v = getattr(args, key)
        if v is not None:
            opts[key] = v
    bounds = TelescopingBounds(**{k: int(v) for k, v in opts.items()})
    out.payload["bounds"] = {"J": bounds.J, "degM": bounds.degM, "degQ": bounds.degQ}
    try:
        cert = telescope_search(f, bounds, axis=axis, seed=cfg.seed)
    except TelescopeNotFound as exc:
        out.payload.update(status="not-found-within-bounds", message=str(exc))
        out.line(str(exc))
        return EXIT_NEGATIVE
    names = f.names
    out.payload["certificate"] = cert.to_json(names)
    out.line(f"T: {cert.T.to_str(names)}")
    out.line(f"R: {cert.R.to_str(names)}")
    out.line(f"status: {cert.status}")
    if args.check:
        chk = telescope_check(f, cert)
        out.payload["check"] = chk.to_json()
        out.line(f"check: {chk.status}")
        if not chk.ok:
            return EXIT_NEGATIVE
    return EXIT_OK


def cmd_dim(args, cfg: SessionConfig, out: _Out) -> int:
    f = _compile(args.expr, args, cfg)
    rep = dimension_estimate(f, args.K, _window(cfg, f.rank), args.mode, args.trials, cfg.seed)
    out.payload["report"] = rep.to_json()
    out.line(f"ranks: {' '.join(map(str, rep.ranks))}")
    out.line(f"degree: {rep.degree if rep.degree is not None else f'>= {rep.degree_lower_bound}'}")
    out.line(f"verdict: {rep.verdict}")
    return EXIT_OK


def cmd_classify(args, cfg: SessionConfig, out: _Out) -> int:
    f = _compile(args.expr, args, cfg)
    rep = classify_finiteness(f, _guess_config(args, cfg, f))
    out.payload["report"] = rep.to_json()
    out.line(f"integrally finite: {'yes' if rep.integrally_finite else 'no'}")
    out.line(f"finite: {'yes' if rep.finite else 'no'}")
    for label, status in rep.strongly_finite.items():
        out.line(f"elimination in {{{label}}}: {status}")
    return EXIT_OK


def cmd_prove_equal(args, cfg: SessionConfig, out: _Out) -> int:
    f = _compile(args.left, args, cfg)
    g = _compile(args.right, args, cfg)
    points = None
    if args.points:
        try:
            points = [int(v) for v in args.points.split(",") if v.strip()]
        except ValueError:
            raise UsageError("--points expects comma separated integers") from None
    res = prove_equal(f, g, S=points, window=_window(cfg, 1), cfg=_guess_config(args, cfg, f))
    out.payload["result"] = res.to_json()
    out.line(f"status: {res.status}")
    out.line(f"operator: {res.operator}")
    out.line(f"points: {', '.join(map(str, res.points))}")
    if res.witness is not None:
        n, a, b = res.witness
        out.line(f"witness: {f.names[0]}={n}: {a} != {b}")
        return EXIT_NEGATIVE
    return EXIT_OK


def _series_lines(out: _Out, s, names) -> None:
    for n in box_points(s.box):
        out.line(f"{_point_text(names, n)}: {s[n]}")
    out.payload["series"] = {
        "box": [list(w) for w in s.box],
        "coefficients": [{"point": list(n), "value": str(c)} for n, c in sorted(s.nonzero().items())],
    }


def cmd_fourier(args, cfg: SessionConfig, out: _Out) -> int:
    f = _compile(args.expr, args, cfg)
    box = _window(cfg, f.rank)
    if box is None:
        raise UsageError("give the truncation box with --window")
    s = fourier_truncate(f, box)
    if args.hadamard or args.times:
        g = _compile(args.hadamard or args.times, args, cfg)
        t = fourier_truncate(g, box)
        s = hadamard(s, t) if args.hadamard else series_mul(s, t)
    for op in args.op or ():
        kind, var = op[0], op[1:]
        if kind not in "ML" or not (var in f.names or (var == "" and f.rank == 1)):
            raise UsageError(f"--op expects M or L followed by a variable name, got {op!r}")
        s = series_op(kind, f.names.index(var) if var else 0, s)
    _series_lines(out, s, f.names)
    return EXIT_OK


# -- parser ----------------------------------------------------------------------


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--vars", help="comma separated variable names in order (default: order of appearance)")
    p.add_argument("--params", help="comma separated parameter names, e.g. x")
    p.add_argument("--seed", type=int, help="random seed for probabilistic steps (default 0)")
    p.add_argument("--json", action="store_true", help="machine-readable output")
    p.add_argument("--config", help="TOML file with session defaults")
    p.add_argument("--window", help="box such as -4..8 or 0..5,-2..3")
    return p


def _guess_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--order", type=int)
    p.add_argument("--mdeg", type=int)
    p.add_argument("--qdeg", type=int)
    p.add_argument("--pdeg", type=int)


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="qhol", description="Exact computation with q-holonomic sequences.")
    parser.add_argument("--version", action="version", version=f"qhol {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval", parents=[common], help="evaluate an expression")
    p.add_argument("expr")
    p.add_argument("--at", action="append", help="point such as n=0 or n=2,k=1 (repeatable)")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("guess", parents=[common], help="guess annihilating operators")
    p.add_argument("expr")
    _guess_flags(p)
    p.add_argument("--gens", help="generators allowed in the ansatz, e.g. Mn,Ln,Lk")
    p.set_defaults(func=cmd_guess)

    p = sub.add_parser("verify", parents=[common], help="print residuals of an operator on a window")
    p.add_argument("op")
    p.add_argument("expr")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("closure", parents=[common], help="annihilators of sums, products and substitutions")
    p.add_argument("operation", choices=["sum", "mul", "subst"])
    p.add_argument("exprs", nargs="+")
    p.add_argument("--map", help="substitution such as 'n -> n - k'")
    p.add_argument("--to", help="variables after substitution, e.g. n,k")
    _guess_flags(p)
    p.set_defaults(func=cmd_closure)

    p = sub.add_parser("telescope", parents=[common], help="creative telescoping certificate for a summand")
    p.add_argument("expr")
    p.add_argument("--axis", help="summation variable (default: the last one)")
    p.add_argument("--J", type=int)
    p.add_argument("--degM", type=int)
    p.add_argument("--degQ", type=int)
    p.add_argument("--check", action="store_true", help="also verify the induced recurrence of the sum over 0..n")
    p.set_defaults(func=cmd_telescope)

    p = sub.add_parser("dim", parents=[common], help="estimate the filtration dimension")
    p.add_argument("expr")
    p.add_argument("--K", type=int)
    p.add_argument("--mode", choices=["probabilistic", "exact"], default="probabilistic")
    p.add_argument("--trials", type=int, default=3)
    p.set_defaults(func=cmd_dim)

    p = sub.add_parser("classify", parents=[common], help="finiteness hierarchy evidence")
    p.add_argument("expr")
    _guess_flags(p)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("prove-equal", parents=[common], help="zero recognition for two sequences in one variable")
    p.add_argument("left")
    p.add_argument("right")
    p.add_argument("--points", help="determining set such as -1,0,1")
    _guess_flags(p)
    p.set_defaults(func=cmd_prove_equal)

    p = sub.add_parser("fourier", parents=[common], help="truncated Fourier series")
    p.add_argument("expr")
    p.add_argument("--op", action="append", help="apply M<var> or L<var> to the series (repeatable)")
    p.add_argument("--hadamard", help="coefficientwise product with another expression")
    p.add_argument("--times", help="power series product with another expression")
    p.set_defaults(func=cmd_fourier)
    return parser


# options whose values may start with a minus sign (windows, point lists)
_SIGNED_VALUE_OPTIONS = ("--window", "--points", "--at", "--map")


def _join_signed_values(argv: Seq[str]) -> list[str]:
    out: list[str] = []
    it = iter(argv)
    for tok in it:
        if tok in _SIGNED_VALUE_OPTIONS:
            nxt = next(it, None)
            if nxt is None:
                out.append(tok)
            else:
                out.append(f"{tok}={nxt}")
        else:
            out.append(tok)
    return out


def main(argv: Seq[str] | None = None) -> int:
    parser = build_parser()
    argv = _join_signed_values(sys.argv[1:] if argv is None else list(argv))
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_USAGE
    try:
        cfg = _merge(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    out = _Out(args.command, cfg)
    try:
        code = args.func(args, cfg, out)
    except (UsageError, DslError, GuessError, ParseError) as exc:
        return _fail(out, exc, EXIT_USAGE)
    except (ClosureError, SeriesOverflow, VerificationError) as exc:
        return _fail(out, exc, EXIT_NEGATIVE)
    except ValueError as exc:
        return _fail(out, exc, EXIT_USAGE)
    out.emit()
    return code


def _fail(out: _Out, exc: Exception, code: int) -> int:
    info = exc.to_json() if isinstance(exc, DslError) else {"code": type(exc).__name__, "message": str(exc)}
    if out.json:
        out.payload["error"] = info
        out.payload["exit_code"] = code
        print(json.dumps(out.payload, indent=2, sort_keys=True))
    else:
        print(f"error: {info['message']}", file=sys.stderr)
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
