"""Case grids, ordered parallel execution and report emission.

A case is an immutable descriptor ``(kind, args)``; :func:`run_case` turns it
into a :class:`~qsum.report.VerificationReport`.  Workers receive descriptors
only, and results are written in descriptor order whatever the schedule.
"""
from __future__ import annotations

import itertools
import os
import random
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence, TextIO

from . import proofsteps as ps
from .cyclotome import CycloContext, verify_cyclo_products
from .identities import ConjectureParams, TheoremParams, verify_conjecture, verify_theorem
from .report import FAIL, INDETERMINATE, PASS, STATUSES, VerificationReport

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_INDETERMINATE = 0, 1, 2, 3

TARGETS = ("theorem", "conjecture", "proofchain", "milne", "milne-mod", "detlemma", "cyclo")

Case = tuple  # (kind, args)


class SpecError(ValueError):
    """Bad sweep or case specification (maps to the usage exit code)."""


@dataclass(frozen=True)
class SweepSpec:
    target: str
    ranges: dict = field(default_factory=dict)
    truncation: int | None = None
    seed: int = 42
    workers: int = 1

    def __post_init__(self):
        if self.target not in TARGETS:
            raise SpecError(f"unknown target {self.target!r}")
        if self.workers < 1:
            raise SpecError("workers must be >= 1")
        for name, (lo, hi) in self.ranges.items():
            if lo > hi:
                raise SpecError(f"empty range for {name}: {lo}..{hi}")

    def span(self, name: str, default: tuple[int, int]) -> range:
        lo, hi = self.ranges.get(name, default)
        return range(lo, hi + 1)


def default_jobs() -> int:
    env = os.environ.get("QSUM_JOBS")
    if env:
        try:
            jobs = int(env)
        except ValueError:
            raise SpecError(f"QSUM_JOBS must be an integer, got {env!r}") from None
        if jobs < 1:
            raise SpecError("QSUM_JOBS must be >= 1")
        return jobs
    return os.cpu_count() or 1


# ---------------------------------------------------------------------------
# cases


PROOFCHAIN_STEPS = ("eq2", "eq3", "milne-lim", "eq4", "eq5", "eq6", "eq7", "cancel", "eq8", "eq9")

_STEP_FUNCS = {
    "eq2": ps.verify_eq2,
    "eq3": ps.verify_eq3,
    "milne-lim": ps.verify_milne_lim,
    "eq4": ps.verify_eq4,
    "eq5": ps.verify_eq5,
    "eq7": ps.verify_eq7,
    "cancel": ps.verify_cancellation,
    "eq8": ps.verify_eq8,
    "eq9": ps.verify_eq9_eq10,
}


def det_instance(size: int, idx: int, seed: int) -> ps.DetLemmaInstance:
    return ps.random_det_instance(size, random.Random(f"{seed}:det:{size}:{idx}"))


def run_case(case: Case) -> VerificationReport:
    kind, args = case
    if kind == "theorem":
        return verify_theorem(TheoremParams(*args))
    if kind == "conjecture":
        return verify_conjecture(ConjectureParams(*args))
    if kind == "cyclo":
        return verify_cyclo_products(*args)
    if kind == "milne":
        l, N, idx, seed = args
        return ps.milne_point(l, N, idx, seed)
    if kind == "milne-mod":
        l, N, M, idx, seed = args
        return ps.milne_point(l, N, idx, seed, mod_M=M)
    if kind == "detlemma":
        size, idx, seed = args
        return ps.verify_det_lemma(det_instance(size, idx, seed))
    if kind == "vandermonde":
        n, k = args
        return ps.verify_vandermonde_rewrite(n, k)
    if kind == "psi1":
        N, B, Z, ell, n, T = args
        return ps.verify_1psi1_special(N, B, Z, ell, CycloContext(n) if n > 1 else None, T)
    if kind == "eq6":
        n, M1, M2, T = args
        return ps.verify_eq6(n, M1, M2, T)
    if kind in _STEP_FUNCS:
        return _STEP_FUNCS[kind](*args)
    raise SpecError(f"unknown case kind {kind!r}")


def theorem_cases(spec: SweepSpec) -> list[Case]:
    out = []
    for n in spec.span("n", (1, 4)):
        for M1 in spec.span("M1", (0, 6)):
            for M2 in spec.span("M2", (0, 6)):
                for S in range(-M1, M2 + 1):
                    out.append(("theorem", (n, M1, M2, S)))
    return out


def conjecture_cases(spec: SweepSpec) -> list[Case]:
    out = []
    for n in spec.span("n", (1, 3)):
        for m in spec.span("m", (1, 3)):
            for M1 in spec.span("M1", (0, 4)):
                for M2 in spec.span("M2", (0, 4)):
                    for S1 in range(-M1, M2 + 1):
                        for S2 in range(-M1, M2 + 1):
                            out.append(("conjecture", (n, m, M1, M2, S1, S2)))
    return out


def milne_cases(spec: SweepSpec, mod: bool = False) -> list[Case]:
    out = []
    points = spec.span("points", (1, 25))
    for l in spec.span("l", (1, 3)):
        for N in itertools.product(spec.span("N", (0, 2)), repeat=l):
            if mod:
                for M in spec.span("M", (0, 2)):
                    out.extend(("milne-mod", (l, N, M, idx, spec.seed)) for idx in range(len(points)))
            else:
                out.extend(("milne", (l, N, idx, spec.seed)) for idx in range(len(points)))
    return out


def detlemma_cases(spec: SweepSpec) -> list[Case]:
    instances = len(spec.span("instances", (1, 10)))
    return [("detlemma", (size, idx, spec.seed))
            for size in spec.span("size", (1, 6)) for idx in range(instances)]


def cyclo_cases(spec: SweepSpec) -> list[Case]:
    return [("cyclo", (n,)) for n in spec.span("n", (2, 12))]


def proofchain_cases(n: int, M1: int, M2: int, T: int | None = None) -> list[Case]:
    if n < 1 or M1 < 0 or M2 < 0:
        raise SpecError("need n >= 1 and M1, M2 >= 0")
    if M1 % n or M2 % n:
        raise SpecError(f"the proof chain needs n | M1 and n | M2 (n={n}, M1={M1}, M2={M2})")
    T = ps.default_truncation(n, M2) if T is None else T
    out = []
    for step in PROOFCHAIN_STEPS:
        out.append(("eq6", (n, M1, M2, T)) if step == "eq6" else (step, (n, M1, M2)))
    return out


def proofchain_sweep_cases(spec: SweepSpec) -> list[Case]:
    out = []
    for n in spec.span("n", (2, 3)):
        for M1 in spec.span("M1", (0, 2 * n)):
            for M2 in spec.span("M2", (0, n)):
                if M1 % n == 0 and M2 % n == 0:
                    out.extend(proofchain_cases(n, M1, M2, spec.truncation))
    return out


def sweep_cases(spec: SweepSpec) -> list[Case]:
    builders = {
        "theorem": theorem_cases,
        "conjecture": conjecture_cases,
        "milne": milne_cases,
        "milne-mod": lambda s: milne_cases(s, mod=True),
        "detlemma": detlemma_cases,
        "cyclo": cyclo_cases,
        "proofchain": proofchain_sweep_cases,
    }
    return builders[spec.target](spec)


# ---------------------------------------------------------------------------
# execution and output


def execute(cases: Sequence[Case], jobs: int = 1) -> Iterable[VerificationReport]:
    """Reports in case order; ``jobs > 1`` fans out to worker processes."""
    if jobs <= 1 or len(cases) <= 1:
        for case in cases:
            yield run_case(case)
        return
    chunk = max(1, len(cases) // (jobs * 8))
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        # map() yields in submission order, which is the canonical order
        yield from pool.map(run_case, cases, chunksize=chunk)


def exit_code(counts: dict) -> int:
    if counts.get(FAIL):
        return EXIT_FAIL
    if counts.get(INDETERMINATE):
        return EXIT_INDETERMINATE
    return EXIT_OK


def summary_line(counts: dict, elapsed_ms: int | None = None) -> str:
    total = sum(counts.values())
    parts = [f"{s}={counts.get(s, 0)}" for s in STATUSES]
    line = f"summary: total={total} " + " ".join(parts)
    if elapsed_ms is not None:
        line += f" elapsed_ms={elapsed_ms}"
    return line


def emit(reports: Iterable[VerificationReport], out: TextIO, fmt: str = "ndjson",
         seed: int | None = None, timing: bool = False, err: TextIO | None = None) -> int:
    """Write reports, then a summary; returns the exit code.

    In ndjson mode the summary goes to ``err`` so that ``out`` stays a pure
    report stream.  Wall-clock figures appear only with ``timing``.
    """
    err = sys.stderr if err is None else err
    counts = {s: 0 for s in STATUSES}
    start = time.perf_counter()
    for rep in reports:
        counts[rep.status] += 1
        if fmt == "ndjson":
            out.write(rep.to_json(seed, timing) + "\n")
            out.flush()
        elif rep.status != PASS:
            out.write(f"{rep.status}: {rep.case_name} {rep.params}\n")
    elapsed = int(round((time.perf_counter() - start) * 1000))
    if fmt == "ndjson":
        err.write(summary_line(counts, elapsed) + "\n")
    else:
        out.write(summary_line(counts, elapsed if timing else None) + "\n")
    return exit_code(counts)


def run_cases(cases: Sequence[Case], jobs: int, out: TextIO, fmt: str = "ndjson",
              seed: int | None = None, timing: bool = False, err: TextIO | None = None) -> int:
    return emit(execute(cases, jobs), out, fmt, seed, timing, err)


def run_sweep(spec: SweepSpec, out: TextIO, fmt: str = "ndjson", timing: bool = False,
              err: TextIO | None = None) -> int:
    return run_cases(sweep_cases(spec), spec.workers, out, fmt, spec.seed, timing, err)


def run_proofchain(n: int, M1: int, M2: int, T: int | None, out: TextIO, jobs: int = 1,
                   fmt: str = "ndjson", seed: int | None = None, timing: bool = False,
                   err: TextIO | None = None) -> int:
    return run_cases(proofchain_cases(n, M1, M2, T), jobs, out, fmt, seed, timing, err)
