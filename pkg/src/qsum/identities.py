"""The summation theorem, the conjectured transformation and the rotation trick.

Every summand is built as a :class:`~qsum.qcore.QFactored`; sums are taken
after multiplying by the composition-independent clearing factor
``F = prod_i (q^(M1+M2+i); q)_(n-i)``, which turns each summand into a
Laurent monomial times Vandermonde binomials times Gaussian binomials.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator, Sequence

from .qcore import LaurentPoly, QFactored, poch_qpow, qf_expand, qfact
from .report import FAIL, PASS, VerificationReport, timed


class EmptySupport(ValueError):
    """A summation index has no value giving a nonzero summand."""


class ParameterError(ValueError):
    pass


@dataclass(frozen=True)
class TheoremParams:
    n: int
    M1: int
    M2: int
    S: int = 0

    def __post_init__(self):
        if self.n < 1 or self.M1 < 0 or self.M2 < 0:
            raise ParameterError("need n >= 1 and M1, M2 >= 0")
        if not -self.M1 <= self.S <= self.M2:
            raise ParameterError(f"S={self.S} outside [-M1, M2] = [{-self.M1}, {self.M2}]")

    def label(self) -> str:
        return f"n={self.n},M1={self.M1},M2={self.M2},S={self.S}"


@dataclass(frozen=True)
class ConjectureParams:
    n: int
    m: int
    M1: int
    M2: int
    S1: int = 0
    S2: int = 0

    def __post_init__(self):
        if self.n < 1 or self.m < 1 or self.M1 < 0 or self.M2 < 0:
            raise ParameterError("need n, m >= 1 and M1, M2 >= 0")
        for name, s in (("S1", self.S1), ("S2", self.S2)):
            if not -self.M1 <= s <= self.M2:
                raise ParameterError(f"{name}={s} outside [-M1, M2] = [{-self.M1}, {self.M2}]")

    def label(self) -> str:
        return (f"n={self.n},m={self.m},M1={self.M1},M2={self.M2},"
                f"S1={self.S1},S2={self.S2}")

    def swapped(self) -> "ConjectureParams":
        return ConjectureParams(self.m, self.n, self.M1, self.M2, self.S2, self.S1)


@dataclass(frozen=True)
class RotationData:
    Q: int
    R: int


# ---------------------------------------------------------------------------
# supports and compositions


def support_bounds(p: TheoremParams, i: int, shift: int = 0) -> tuple[int, int]:
    """Range of k_i outside which ``1/(q;q)_negative`` kills the summand."""
    n = p.n
    if not 1 <= i <= n:
        raise IndexError(i)
    lo = -((p.M1 + shift + i - 1) // n)
    hi = (p.M2 - shift + n - i) // n
    if lo > hi:
        raise EmptySupport(f"k_{i}: lo={lo} > hi={hi}")
    return lo, hi


def compositions(total: int, bounds: Sequence[tuple[int, int]]) -> Iterator[tuple[int, ...]]:
    """Integer vectors in the box ``bounds`` summing to ``total``, lexicographically."""
    n = len(bounds)
    if n == 0:
        if total == 0:
            yield ()
        return
    # suffix min/max sums prune the search
    smin = [0] * (n + 1)
    smax = [0] * (n + 1)
    for i in range(n - 1, -1, -1):
        smin[i] = smin[i + 1] + bounds[i][0]
        smax[i] = smax[i + 1] + bounds[i][1]
    parts = [0] * n

    def rec(i: int, rest: int):
        if i == n - 1:
            lo, hi = bounds[i]
            if lo <= rest <= hi:
                parts[i] = rest
                yield tuple(parts)
            return
        lo, hi = bounds[i]
        lo = max(lo, rest - smax[i + 1])
        hi = min(hi, rest - smin[i + 1])
        for k in range(lo, hi + 1):
            parts[i] = k
            yield from rec(i + 1, rest - k)

    yield from rec(0, total)


def enumerate_compositions(p: TheoremParams, shift: int = 0, total: int | None = None):
    """Compositions of ``total`` (default ``p.S``) inside the support box."""
    try:
        bounds = [support_bounds(p, i, shift) for i in range(1, p.n + 1)]
    except EmptySupport:
        return iter(())
    return compositions(p.S if total is None else total, bounds)


# ---------------------------------------------------------------------------
# factored pieces


def vandermonde_qf(n: int, k: Sequence[int]) -> QFactored:
    """``prod_{i<j} (1 - q^(n k_j - n k_i + j - i))``."""
    out = QFactored.unit()
    for i in range(n):
        for j in range(i + 1, n):
            out = out * QFactored.binomial(n * (k[j] - k[i]) + j - i)
    return out


@lru_cache(maxsize=None)
def clearing_factor(n: int, M1: int, M2: int) -> QFactored:
    """``prod_{i=1}^{n} (q^(M1+M2+i); q)_(n-i)``."""
    out = QFactored.unit()
    for i in range(1, n + 1):
        out = out * poch_qpow(M1 + M2 + i, n - i)
    return out


def _pochhammer_block(n: int, M1: int, M2: int, k: Sequence[int]) -> QFactored:
    out = QFactored.unit()
    for i in range(1, n + 1):
        ki = k[i - 1]
        out = out * qfact(M1 + M2 + i - 1) / (qfact(M1 + n * ki + i - 1) * qfact(M2 - n * ki + n - i))
    return out


def summand_theorem(p: TheoremParams, k: Sequence[int]) -> QFactored:
    n = p.n
    if sum(k) != p.S or len(k) != n:
        raise ParameterError(f"{k} is not a composition of {p.S} into {n} parts")
    exp = (n * (n + 1) // 2) * sum(x * x for x in k) + sum(i * x for i, x in enumerate(k, 1))
    sign = -1 if ((n - 1) * p.S) % 2 else 1
    return QFactored(sign, exp) * vandermonde_qf(n, k) * _pochhammer_block(n, p.M1, p.M2, k)


def lhs_theorem(p: TheoremParams) -> LaurentPoly:
    """``F(p)`` times the left-hand side, as an exact Laurent polynomial."""
    F = clearing_factor(p.n, p.M1, p.M2)
    total = LaurentPoly()
    for k in enumerate_compositions(p):
        total = total + qf_expand(F * summand_theorem(p, k))
    return total


def rhs_theorem(p: TheoremParams) -> QFactored:
    S = p.S
    return (QFactored.monomial((p.n + 1) * (S * (S + 1) // 2))
            * qfact(p.M1 + p.M2) / (qfact(p.M1 + S) * qfact(p.M2 - S)))


def _poly_witness(lhs: LaurentPoly, rhs: LaurentPoly) -> str:
    return f"lhs={lhs}; rhs={rhs}; lhs-rhs={lhs - rhs}"


def verify_theorem(p: TheoremParams) -> VerificationReport:
    with timed() as clock:
        lhs = lhs_theorem(p)
        rhs = qf_expand(clearing_factor(p.n, p.M1, p.M2) * rhs_theorem(p))
        ok = lhs == rhs
    return VerificationReport("theorem", p.label(), PASS if ok else FAIL,
                              None if ok else _poly_witness(lhs, rhs), clock.ms)


# ---------------------------------------------------------------------------
# the conjectured transformation


def conj_summand(dim: int, other: int, M1: int, M2: int, S: int, k: Sequence[int]) -> QFactored:
    n, m = dim, other
    sk2 = sum(x * x for x in k)
    twice = (n * (n + m) * sk2 + 2 * m * sum(i * x for i, x in enumerate(k, 1))
             - m * S * (S + 1) - n * S * (S + m))
    if twice % 2:
        raise AssertionError("odd doubled exponent")
    sign = -1 if ((n - 1) * S) % 2 else 1
    return (QFactored(sign, twice // 2) * vandermonde_qf(n, k)
            * _pochhammer_block(n, M1 - S, M2 + S, k))


@lru_cache(maxsize=4096)
def conj_side(dim: int, other: int, M1: int, M2: int, S: int) -> LaurentPoly:
    """One side of the transformation (dimension ``dim``), times its clearing factor."""
    if not -M1 <= S <= M2:
        raise ParameterError(f"S={S} outside [-M1, M2]")
    p = TheoremParams(dim, M1, M2, 0)
    F = clearing_factor(dim, M1, M2)
    total = LaurentPoly()
    for k in enumerate_compositions(p, shift=-S, total=S):
        total = total + qf_expand(F * conj_summand(dim, other, M1, M2, S, k))
    return total


def verify_conjecture(p: ConjectureParams) -> VerificationReport:
    """Cross-multiplied comparison of both sides; a failure is a counterexample."""
    with timed() as clock:
        left = conj_side(p.n, p.m, p.M1, p.M2, p.S1) * qf_expand(clearing_factor(p.m, p.M1, p.M2))
        right = conj_side(p.m, p.n, p.M1, p.M2, p.S2) * qf_expand(clearing_factor(p.n, p.M1, p.M2))
        ok = left == right
    return VerificationReport("conjecture", p.label(), PASS if ok else FAIL,
                              None if ok else _poly_witness(left, right), clock.ms)


# ---------------------------------------------------------------------------
# rotation trick


def rotation_map(n: int, S: int) -> RotationData:
    Q, R = divmod(S, n)
    return RotationData(Q, R)


def rotate_composition(k: Sequence[int], rot: RotationData) -> tuple[int, ...]:
    """Send a composition of 0 to the matching composition of ``S = Qn + R``.

    Inverse of the substitution k_i -> k'_(i+R) - Q (i <= n-R),
    k_i -> k'_(i-n+R) - Q - 1 (i > n-R).
    """
    n = len(k)
    Q, R = rot.Q, rot.R
    out = [0] * n
    for i in range(1, n + 1):
        if i <= n - R:
            out[i + R - 1] = k[i - 1] + Q
        else:
            out[i - (n - R) - 1] = k[i - 1] + Q + 1
    return tuple(out)


def unrotate_composition(k: Sequence[int], rot: RotationData) -> tuple[int, ...]:
    n = len(k)
    Q, R = rot.Q, rot.R
    out = [0] * n
    for i in range(1, n + 1):
        if i <= n - R:
            out[i - 1] = k[i + R - 1] - Q
        else:
            out[i - 1] = k[i - (n - R) - 1] - Q - 1
    return tuple(out)
