"""Verification outcome records."""
from __future__ import annotations

import hashlib
import json
import time
from contextlib import contextmanager
from dataclasses import dataclass

PASS, FAIL, INDETERMINATE = "pass", "fail", "indeterminate"
STATUSES = (PASS, FAIL, INDETERMINATE)
WITNESS_LIMIT = 4096


@dataclass
class VerificationReport:
    case_name: str
    params: str
    status: str
    witness: str | None = None
    elapsed_ms: int = 0

    def __post_init__(self):
        if self.status not in STATUSES:
            raise ValueError(f"bad status {self.status!r}")
        if self.status == FAIL and not self.witness:
            raise ValueError("a failing report needs a witness")

    @property
    def passed(self) -> bool:
        return self.status == PASS

    def record(self, seed: int | None = None, timing: bool = True) -> dict:
        return {
            "case": self.case_name,
            "params": self.params,
            "status": self.status,
            "witness": clip_witness(self.witness),
            "elapsed_ms": self.elapsed_ms if timing else 0,
            "seed": seed,
        }

    def to_json(self, seed: int | None = None, timing: bool = True) -> str:
        return json.dumps(self.record(seed, timing), sort_keys=False, separators=(",", ":"))


def clip_witness(text: str | None) -> str | None:
    """Bound a witness to WITNESS_LIMIT characters, citing the full SHA-256."""
    if text is None or len(text) <= WITNESS_LIMIT:
        return text
    digest = hashlib.sha256(text.encode()).hexdigest()
    suffix = f"...[truncated; {len(text)} chars; sha256={digest}]"
    return text[: WITNESS_LIMIT - len(suffix)] + suffix


class _Clock:
    ms = 0


@contextmanager
def timed():
    clock = _Clock()
    start = time.perf_counter()
    try:
        yield clock
    finally:
        clock.ms = int(round((time.perf_counter() - start) * 1000))


def compare(case: str, params: str, lhs, rhs, describe=None) -> VerificationReport:
    """Report comparing two exact values; the witness is their difference."""
    with timed() as clock:
        ok = lhs == rhs
    witness = None
    if not ok:
        witness = describe(lhs, rhs) if describe else f"lhs - rhs = {lhs - rhs}"
    return VerificationReport(case, params, PASS if ok else FAIL, witness, clock.ms)
