"""Command-line entry point: ``qsum verify|sweep|proofstep|proofchain``."""
from __future__ import annotations

import argparse
import sys
from contextlib import contextmanager

from . import harness as h
from .identities import ParameterError
from .proofsteps import DomainError, default_truncation


class _Parser(argparse.ArgumentParser):
    """ArgumentParser whose usage errors raise instead of exiting directly."""

    def error(self, message):
        raise h.SpecError(message)


def _range(text: str) -> tuple[int, int]:
    """``"3"`` or ``"0:6"`` (inclusive)."""
    try:
        if ":" in text:
            lo, hi = text.split(":", 1)
            return int(lo), int(hi)
        v = int(text)
        return v, v
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected INT or LO:HI, got {text!r}") from None


def _int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=42, help="base seed for sampled cases (default 42)")
    p.add_argument("--jobs", type=int, default=None,
                   help="worker processes (default: $QSUM_JOBS, else logical cores)")
    p.add_argument("--truncation", type=int, default=None,
                   help="series truncation order T (default n^2(n+M2)+10)")
    p.add_argument("--out", default=None, help="output path (default stdout)")
    p.add_argument("--format", choices=("ndjson", "summary"), default="ndjson")
    p.add_argument("--timing", action="store_true",
                   help="record wall-clock elapsed_ms (off by default to keep output reproducible)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qsum", description="Exact verification of a multidimensional q-series "
                                              "summation, a conjectured transformation and each proof step.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    v = sub.add_parser("verify", help="verify a single case")
    vsub = v.add_subparsers(dest="target", required=True, parser_class=_Parser)
    vt = vsub.add_parser("theorem")
    _common(vt)
    vt.add_argument("--n", type=int, required=True)
    vt.add_argument("--m1", type=int, required=True)
    vt.add_argument("--m2", type=int, required=True)
    vt.add_argument("--s", type=int, default=0)
    vc = vsub.add_parser("conjecture")
    _common(vc)
    vc.add_argument("--n", type=int, required=True)
    vc.add_argument("--m", type=int, required=True)
    vc.add_argument("--m1", type=int, required=True)
    vc.add_argument("--m2", type=int, required=True)
    vc.add_argument("--s1", type=int, default=0)
    vc.add_argument("--s2", type=int, default=0)

    s = sub.add_parser("sweep", help="run a parameter grid")
    s.add_argument("target", choices=h.TARGETS)
    _common(s)
    for flag, what in (("--n", "n"), ("--m", "m (conjecture)"), ("--m1", "M1"), ("--m2", "M2"),
                       ("--l", "Milne dimension l"), ("--N", "each N_i (Milne)"), ("--M", "M (milne-mod)"),
                       ("--size", "determinant size")):
        s.add_argument(flag, type=_range, default=None, help=f"range of {what} as LO:HI")
    s.add_argument("--points", type=int, default=None, help="sampled points per Milne configuration")
    s.add_argument("--instances", type=int, default=None, help="sampled instances per determinant size")

    p = sub.add_parser("proofstep", help="verify one step of the proof chain")
    p.add_argument("step", choices=("eq2", "eq3", "milne", "milne-mod", "milne-lim", "eq4", "vandermonde",
                                    "eq5", "psi1", "eq6", "eq7", "cancel", "detlemma", "eq8", "eq9", "cyclo"))
    _common(p)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--m1", type=int, default=None)
    p.add_argument("--m2", type=int, default=None)
    p.add_argument("--k", type=_int_list, default=None, help="indices k_1..k_(n-1) (vandermonde)")
    p.add_argument("--l", type=int, default=None, help="Milne dimension")
    p.add_argument("--N", type=_int_list, default=None,
                   help="Milne N_1..N_l, or the single psi1 exponent N")
    p.add_argument("--M", type=int, default=0, help="shift M of the reversed Milne form")
    p.add_argument("--points", type=int, default=25)
    p.add_argument("--B", type=int, default=None)
    p.add_argument("--Z", type=int, default=None)
    p.add_argument("--ell", type=int, default=0)
    p.add_argument("--size", type=int, default=None, help="determinant size")
    p.add_argument("--instances", type=int, default=10)

    c = sub.add_parser("proofchain", help="run every proof step for one (n, M1, M2)")
    _common(c)
    c.add_argument("--n", type=int, required=True)
    c.add_argument("--m1", type=int, required=True)
    c.add_argument("--m2", type=int, required=True)
    return parser


def _need(args, *names):
    missing = [n for n in names if getattr(args, n) is None]
    if missing:
        raise h.SpecError(f"{args.step} needs " + ", ".join("--" + m.replace('_', '-') for m in missing))


_NEEDS_NM = ("eq2", "eq3", "milne-lim", "eq4", "eq5", "eq6", "eq7", "cancel", "eq8", "eq9")
_NEEDS_DIVISIBLE = ("milne-lim", "eq4", "eq5", "eq6", "eq7", "eq9")


def _proofstep_cases(args) -> list:
    step = args.step
    if step in _NEEDS_NM:
        _need(args, "n", "m1", "m2")
        if args.n < 1 or args.m1 < 0 or args.m2 < 0:
            raise h.SpecError("need n >= 1 and M1, M2 >= 0")
        if step == "eq3" and args.m1 % args.n:
            raise DomainError(f"eq3 needs n | M1 (n={args.n}, M1={args.m1})")
        if step in _NEEDS_DIVISIBLE and (args.m1 % args.n or args.m2 % args.n):
            raise DomainError(f"{step} needs n | M1 and n | M2 (n={args.n}, M1={args.m1}, M2={args.m2})")
    if step != "eq6" and step in _NEEDS_NM:
        return [(step, (args.n, args.m1, args.m2))]
    if step == "eq6":
        T = args.truncation if args.truncation is not None else default_truncation(args.n, args.m2)
        return [("eq6", (args.n, args.m1, args.m2, T))]
    if step == "vandermonde":
        _need(args, "n", "k")
        return [("vandermonde", (args.n, args.k))]
    if step in ("milne", "milne-mod"):
        _need(args, "l", "N")
        if len(args.N) != args.l or min(args.N, default=0) < 0:
            raise h.SpecError("--N needs l nonnegative entries")
        if step == "milne":
            return [("milne", (args.l, args.N, i, args.seed)) for i in range(args.points)]
        return [("milne-mod", (args.l, args.N, args.M, i, args.seed)) for i in range(args.points)]
    if step == "psi1":
        _need(args, "N", "B", "Z")
        if len(args.N) != 1:
            raise h.SpecError("psi1 takes a single --N")
        n = args.n if args.n is not None else 1
        T = args.truncation if args.truncation is not None else 12
        return [("psi1", (args.N[0], args.B, args.Z, args.ell, n, T))]
    if step == "detlemma":
        sizes = [args.size] if args.size is not None else list(range(1, 7))
        return [("detlemma", (s, i, args.seed)) for s in sizes for i in range(args.instances)]
    if step == "cyclo":
        _need(args, "n")
        return [("cyclo", (args.n,))]
    raise h.SpecError(f"unknown step {step}")


def _sweep_spec(args, jobs: int) -> h.SweepSpec:
    ranges = {}
    for key, attr in (("n", "n"), ("m", "m"), ("M1", "m1"), ("M2", "m2"), ("l", "l"), ("N", "N"),
                      ("M", "M"), ("size", "size")):
        val = getattr(args, attr)
        if val is not None:
            ranges[key] = val
    if args.points is not None:
        ranges["points"] = (1, args.points)
    if args.instances is not None:
        ranges["instances"] = (1, args.instances)
    return h.SweepSpec(args.target, ranges, args.truncation, args.seed, jobs)


def _cases(args, jobs: int) -> list:
    if args.command == "verify":
        if args.target == "theorem":
            from .identities import TheoremParams
            TheoremParams(args.n, args.m1, args.m2, args.s)
            return [("theorem", (args.n, args.m1, args.m2, args.s))]
        from .identities import ConjectureParams
        ConjectureParams(args.n, args.m, args.m1, args.m2, args.s1, args.s2)
        return [("conjecture", (args.n, args.m, args.m1, args.m2, args.s1, args.s2))]
    if args.command == "sweep":
        return h.sweep_cases(_sweep_spec(args, jobs))
    if args.command == "proofstep":
        return _proofstep_cases(args)
    return h.proofchain_cases(args.n, args.m1, args.m2, args.truncation)


@contextmanager
def _output(path):
    if path is None:
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            yield fh


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        jobs = args.jobs if args.jobs is not None else h.default_jobs()
        if jobs < 1:
            raise h.SpecError("--jobs must be >= 1")
        cases = _cases(args, jobs)
    except (h.SpecError, ParameterError, DomainError) as exc:
        sys.stderr.write(f"qsum: error: {exc}\n")
        return h.EXIT_USAGE
    if not cases:
        sys.stderr.write("qsum: error: no cases to run\n")
        return h.EXIT_USAGE
    try:
        with _output(args.out) as out:
            return h.run_cases(cases, jobs, out, args.format, args.seed, args.timing)
    except (ParameterError, DomainError) as exc:
        sys.stderr.write(f"qsum: error: {exc}\n")
        return h.EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
