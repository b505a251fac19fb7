"""Checks for each intermediate identity of the proof of the summation theorem.

The q-only steps are compared as :class:`~qsum.qcore.RatFunc` values by
cross-multiplication.  Steps involving roots of unity use Laurent
polynomials with :class:`~qsum.cyclotome.CycloElem` coefficients; the
one-sided infinite-product step is compared as truncated series.  The Milne
transformation is checked at exact rational points.
"""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb
from typing import Sequence

from .cyclotome import CycloContext
from .identities import (
    ParameterError,
    TheoremParams,
    clearing_factor,
    compositions,
    enumerate_compositions,
    lhs_theorem,
)
from .qcore import ONE, LaurentPoly, QFactored, RatFunc, poch_qpow, qfact
from .qseries import TruncSeries, VanishingFactor, poch_ratio_series, ratfunc_series
from .report import INDETERMINATE, PASS, FAIL, VerificationReport, timed


class DomainError(ValueError):
    """Parameters outside the range where a proof step is stated."""


def _sign(k: int) -> int:
    return -1 if k % 2 else 1


def _half(twice: int) -> int:
    if twice % 2:
        raise AssertionError(f"half-integral exponent {twice}/2")
    return twice // 2


def _perms(n: int):
    """Permutations of 1..n (tuples, one-based values) with their signs."""
    for p in itertools.permutations(range(1, n + 1)):
        inv = sum(1 for i in range(n) for j in range(i + 1, n) if p[i] > p[j])
        yield p, _sign(inv)


def _sum_qf(terms) -> RatFunc:
    total = RatFunc.zero()
    for t in terms:
        total = total + RatFunc.from_qf(t)
    return total


def _require_divisible(n: int, M1: int, M2: int | None = None):
    if M1 % n or (M2 is not None and M2 % n):
        raise DomainError(f"need n | M1{' and n | M2' if M2 is not None else ''} (n={n}, M1={M1}, M2={M2})")


def _report(case: str, params: str, ok: bool | None, witness: str | None, ms: int) -> VerificationReport:
    if ok is None:
        return VerificationReport(case, params, INDETERMINATE, witness, ms)
    return VerificationReport(case, params, PASS if ok else FAIL,
                              None if ok else (witness or "values differ"), ms)


def _label(**kw) -> str:
    return ",".join(f"{k}={v}" for k, v in kw.items())


def _diff_witness(a: RatFunc, b: RatFunc) -> str:
    x, y = a.cross(b)
    return f"cross-multiplied difference: {x - y}"


# ---------------------------------------------------------------------------
# q-only steps


@lru_cache(maxsize=256)
def eq1_lhs(n: int, M1: int, M2: int) -> RatFunc:
    """Left-hand side of the S = 0 identity as a rational function."""
    p = TheoremParams(n, M1, M2, 0)
    return RatFunc(lhs_theorem(p)) * clearing_factor(n, M1, M2).inverse()


def gaussian(M1: int, M2: int) -> RatFunc:
    return RatFunc.from_qf(qfact(M1 + M2) / (qfact(M1) * qfact(M2)))


def verify_eq2(n: int, M1: int, M2: int) -> VerificationReport:
    """The S = 0 identity multiplied through by prod_i (q^(M1+M2+i); q)_n."""
    with timed() as clock:
        p = TheoremParams(n, M1, M2, 0)
        terms = []
        for k in enumerate_compositions(p):
            exp = (n * (n + 1) // 2) * sum(x * x for x in k) + sum(i * x for i, x in enumerate(k, 1))
            t = QFactored.monomial(exp)
            for i in range(n):
                for j in range(i + 1, n):
                    t = t * QFactored.binomial(n * (k[j] - k[i]) + j - i)
            for i, ki in enumerate(k, 1):
                t = t * poch_qpow(M1 + n * ki + i, M2 - n * ki + n) / qfact(M2 - n * ki + n - i)
            terms.append(t)
        lhs = _sum_qf(terms)
        r = poch_qpow(M1 + 1, M2) / qfact(M2)
        for i in range(1, n + 1):
            r = r * poch_qpow(M1 + M2 + i, n)
        rhs = RatFunc.from_qf(r)
        ok = lhs == rhs
    return _report("eq2", _label(n=n, M1=M1, M2=M2), ok, None if ok else _diff_witness(lhs, rhs), clock.ms)


def _eq3_terms(n: int, M1: int, M2: int, extra_twice: int, sign: int, prefactor: QFactored):
    """Summands of the shifted sum over k_1 + ... + k_n = M1 (one spare slot each side)."""
    bounds = [(-1, (M1 + M2 + n - i) // n + 1) for i in range(1, n + 1)]
    for k in compositions(M1, bounds):
        twice = (extra_twice + n * sum(x * x for x in k)
                 - 2 * (n - 1) * sum(i * x for i, x in enumerate(k, 1)))
        t = QFactored(sign, _half(twice)) * prefactor
        for i in range(1, n + 1):
            for j in range(i + 1, n + 1):
                t = t * QFactored.binomial(n * k[j - 1] - n * k[i - 1] + j - i) / QFactored.binomial(j - i)
        for i, ki in enumerate(k, 1):
            t = t * poch_qpow(-M1 - M2 - n + i, n * ki) / poch_qpow(i, n * ki)
        yield t


def eq3_value(n: int, M1: int, M2: int) -> RatFunc:
    _require_divisible(n, M1)
    twice = M1 * (M1 * n - M1 + 2 * n * M2 + 2 * n * n - 1)
    return _sum_qf(_eq3_terms(n, M1, M2, twice, _sign(n * M1), QFactored.unit()))


def verify_eq3(n: int, M1: int, M2: int) -> VerificationReport:
    _require_divisible(n, M1)
    with timed() as clock:
        lhs = eq1_lhs(n, M1, M2)
        rhs = eq3_value(n, M1, M2)
        ok = lhs == rhs
    return _report("eq3", _label(n=n, M1=M1, M2=M2), ok, None if ok else _diff_witness(lhs, rhs), clock.ms)


@lru_cache(maxsize=256)
def eq4_sum(n: int, M1: int, M2: int) -> RatFunc:
    """The (n-1)-fold sum over k_1, ..., k_(n-1) >= 0 produced by the Watson step."""
    ranges = [range(0, (M1 + M2 + n - r) // n + 2) for r in range(1, n)]
    terms = []
    for k in itertools.product(*ranges):
        exp = n * sum(i * x for i, x in enumerate(k, 1)) + M2 * n * sum(k)
        t = QFactored.monomial(exp)
        for r in range(1, n):
            for s in range(r + 1, n):
                t = t * QFactored.binomial(n * k[r - 1] - n * k[s - 1] + r - s) / QFactored.binomial(r - s)
        for r, kr in enumerate(k, 1):
            t = t * poch_qpow(-M1 - M2 - n + r, n * kr) / poch_qpow(r, n * kr)
        terms.append(t)
    return _sum_qf(terms)


def _lim_guard(n: int, M1: int, M2: int) -> bool:
    return n * M1 - M1 - M2 - 1 >= 0


def verify_milne_lim(n: int, M1: int, M2: int) -> VerificationReport:
    """The limiting form of the Watson transformation applied to the shifted sum."""
    _require_divisible(n, M1, M2)
    label = _label(n=n, M1=M1, M2=M2)
    if not _lim_guard(n, M1, M2):
        return _report("milne-lim", label, None,
                       f"n*M1-M1-M2-1 = {n * M1 - M1 - M2 - 1} < 0: both prefactors degenerate", 0)
    with timed() as clock:
        pre_l = qfact(n * M1) / (poch_qpow(-M1 - M2, M1 + M2) * qfact(n * M1 - M1 - M2 - 1))
        lhs = _sum_qf(_eq3_terms(n, M1, M2, n * M1 * (2 * n - M1 - 2), 1, pre_l))
        pre_r = QFactored(-1) * poch_qpow(-n * M1, M1 + M2 + 1) / (
            poch_qpow(-n * M1, M1, step=n) * poch_qpow(n, M2, step=n))
        rhs = eq4_sum(n, M1, M2) * pre_r
        ok = lhs == rhs
    return _report("milne-lim", label, ok, None if ok else _diff_witness(lhs, rhs), clock.ms)


def eq4_prefactor(n: int, M1: int, M2: int) -> QFactored:
    return (QFactored(_sign(M1), -(M1 * (M1 + 1) // 2)) * qfact(M1 + M2)
            / (poch_qpow(-n * M1, M1, step=n) * poch_qpow(n, M2, step=n)))


def verify_eq4(n: int, M1: int, M2: int) -> VerificationReport:
    """Prefactor times the (n-1)-fold sum equals the S = 0 left-hand side.

    Outside the Watson-limit domain the derivation does not apply; the values
    are still compared and the outcome is reported as indeterminate.
    """
    _require_divisible(n, M1, M2)
    with timed() as clock:
        lhs = eq1_lhs(n, M1, M2)
        rhs = eq4_sum(n, M1, M2) * eq4_prefactor(n, M1, M2)
        ok = lhs == rhs
    label = _label(n=n, M1=M1, M2=M2)
    if not _lim_guard(n, M1, M2):
        return _report("eq4", label, None,
                       f"outside the Watson-limit domain (n*M1-M1-M2-1 < 0); values agree: {ok}", clock.ms)
    return _report("eq4", label, ok, None if ok else _diff_witness(lhs, rhs), clock.ms)


def verify_vandermonde_rewrite(n: int, k: Sequence[int]) -> VerificationReport:
    """prod_{r<s<n} (1 - q^(n k_r - n k_s + r - s)) as a signed permutation sum.

    ``k`` is k_1..k_(n-1) or a full composition, whose last entry is unused.
    """
    if len(k) not in (n - 1, n):
        raise ParameterError(f"need n-1 = {n - 1} or n indices, got {len(k)}")
    k = tuple(k[:n - 1])
    with timed() as clock:
        lhs = ONE
        for r in range(1, n):
            for s in range(r + 1, n):
                lhs = lhs * (ONE - LaurentPoly.monomial(n * k[r - 1] - n * k[s - 1] + r - s))
        total = LaurentPoly()
        for sigma, sgn in _perms(n - 1):
            e = sum((sigma[i - 1] - 1) * (n * k[i - 1] + i) for i in range(1, n))
            total = total + LaurentPoly.monomial(e, sgn)
        shift = -n * sum(i * x for i, x in enumerate(k, 1)) + n * sum(k) - 2 * comb(n, 3)
        rhs = total.shift(shift)
        ok = lhs == rhs
    return _report("vandermonde", _label(n=n, k=list(k)), ok,
                   None if ok else f"lhs={lhs}; rhs={rhs}", clock.ms)


def _inner_sum(n: int, M1: int, M2: int, i: int, z: int) -> RatFunc:
    """sum_{k>=0} (q^(-M1-M2-n+i); q)_(nk) / (q^i; q)_(nk) * q^(z n k)."""
    terms = []
    for k in range(0, (M1 + M2 + n - i) // n + 2):
        terms.append(QFactored.monomial(z * n * k)
                     * poch_qpow(-M1 - M2 - n + i, n * k) / poch_qpow(i, n * k))
    return _sum_qf(terms)


def eq5_value(n: int, M1: int, M2: int) -> RatFunc:
    """Permutation expansion of the (n-1)-fold sum into products of 1-D sums."""
    if n - 1 > 7:
        raise DomainError("permutation expansion limited to n - 1 <= 7")
    total = RatFunc.zero()
    for sigma, sgn in _perms(n - 1):
        term = RatFunc(LaurentPoly.monomial(
            -comb(n, 3) + sum(i * (sigma[i - 1] - 1) for i in range(1, n)), sgn))
        for i in range(1, n):
            term = term * _inner_sum(n, M1, M2, i, M2 + sigma[i - 1])
        total = total + term
    pre = QFactored(_sign(comb(n - 1, 2)))
    for i in range(1, n):
        pre = pre / qfact(i - 1)
    return total * pre


def verify_eq5(n: int, M1: int, M2: int) -> VerificationReport:
    _require_divisible(n, M1, M2)
    with timed() as clock:
        lhs = eq4_sum(n, M1, M2)
        rhs = eq5_value(n, M1, M2)
        ok = lhs == rhs
    return _report("eq5", _label(n=n, M1=M1, M2=M2), ok, None if ok else _diff_witness(lhs, rhs), clock.ms)


# ---------------------------------------------------------------------------
# bilateral summation at integer-power specializations


def verify_1psi1_special(N: int, B: int, Z: int, ell: int, ctx: CycloContext | None,
                         T: int) -> VerificationReport:
    """Bilateral sum with a = q^-N, b = q^B, z = w^ell q^Z against its product form."""
    if N < 0 or B < 1:
        raise ParameterError("need N >= 0 and B >= 1")
    if ctx is None and ell:
        raise ParameterError("a nonzero root-of-unity power needs n >= 2")
    n = ctx.n if ctx is not None else 1
    label = _label(N=N, B=B, Z=Z, ell=ell, n=n, T=T)
    with timed() as clock:
        w = (lambda r: ctx.omega_pow(r)) if ctx is not None else (lambda r: 1)
        lhs = RatFunc.zero()
        # (a;q)_k = 0 for k > N and 1/(b;q)_k = 0 for k <= -B
        for k in range(-B + 1, N + 1):
            t = QFactored.monomial(Z * k) * poch_qpow(-N, k) / poch_qpow(B, k)
            lhs = lhs + RatFunc.from_qf(t, scalar=w(ell * k))
        lhs_s = ratfunc_series(lhs, T)
        num = [(0, 1), (0, B + N), (ell, Z - N), (-ell, 1 + N - Z)]
        den = [(0, B), (0, 1 + N), (ell, Z), (-ell, B + N - Z)]
        try:
            rhs_s = poch_ratio_series(ctx, num, den, T)
        except VanishingFactor as exc:
            return _report("psi1", label, None, f"product side degenerates: {exc}", clock.ms)
        ok, order = lhs_s.agree(rhs_s)
    return _report("psi1", label, ok, None if ok else
                   f"disagree below order {order}: lhs={lhs_s}; rhs={rhs_s}", clock.ms)


# ---------------------------------------------------------------------------
# root-of-unity steps


def _ctx(n: int) -> CycloContext:
    return CycloContext(n)


def default_truncation(n: int, M2: int) -> int:
    return n * n * (n + M2) + 10


def _eq6_at(n: int, M1: int, M2: int, W: int) -> TruncSeries:
    ctx = _ctx(n)
    cache: dict = {}

    def ratio(i: int, s: int) -> TruncSeries:
        key = (i, s)
        if key not in cache:
            acc = TruncSeries({}, W)
            for ell in range(1, n):
                num = [(0, 1), (0, M1 + M2 + n), (ell, i + s - M1 - n), (-ell, 1 - i - s + M1 + n)]
                den = [(0, i), (0, 1 - i + M1 + M2 + n), (ell, M2 + s), (-ell, -s + M1 + n)]
                acc = acc + poch_ratio_series(ctx, num, den, W)
            cache[key] = acc.scale(Fraction(1, n))
        return cache[key]

    total = TruncSeries({}, W)
    for sigma, sgn in _perms(n - 1):
        e = -comb(n, 3) + sum(i * (sigma[i - 1] - 1) for i in range(1, n))
        term = TruncSeries({e: sgn})
        for i in range(1, n):
            term = term * ratio(i, sigma[i - 1])
        total = total + term
    pre = QFactored(_sign(comb(n - 1, 2)))
    for i in range(1, n):
        pre = pre / qfact(i - 1)
    return total * ratfunc_series(RatFunc.from_qf(pre), W)


def eq6_series(n: int, M1: int, M2: int, T: int) -> TruncSeries:
    """The n-sectioned product form, summed over l_i = 1..n-1, known to order T.

    Negative valuations of the individual ratios lose precision in products,
    so the working order is raised until the result is certified to T.
    """
    W = T
    while True:
        out = _eq6_at(n, M1, M2, W)
        if out.order >= T:
            return out.truncate(T)
        W += T - out.order


def verify_eq6(n: int, M1: int, M2: int, T: int | None = None) -> VerificationReport:
    _require_divisible(n, M1, M2)
    T = default_truncation(n, M2) if T is None else T
    label = _label(n=n, M1=M1, M2=M2, T=T)
    with timed() as clock:
        exact = eq5_value(n, M1, M2)
        deg = exact.degree()
        lhs = ratfunc_series(exact, T)
        rhs = eq6_series(n, M1, M2, T)
        ok, order = lhs.agree(rhs)
    if ok and order < T:
        return _report("eq6", label, None, f"agreement certified only to order {order} < T={T}", clock.ms)
    if ok and deg is not None and T < deg:
        return _report("eq6", label, None,
                       f"truncation-insufficient: T={T} < degree {deg} of the exact side", clock.ms)
    return _report("eq6", label, ok, None if ok else
                   f"disagree below order {order}: exact={lhs}; product form={rhs}", clock.ms)


def cpoch(ctx: CycloContext, ell: int, s: int, k: int) -> LaurentPoly:
    """(w^ell q^s; q)_k for k >= 0 as a Laurent polynomial over Q(w)."""
    if k < 0:
        raise ValueError("finite cyclotomic Pochhammer needs k >= 0")
    c = ctx.omega_pow(ell)
    out = ONE
    for j in range(k):
        out = out * (ONE - LaurentPoly.monomial(s + j, c))
    return out


def _eq7_factor(ctx: CycloContext, n: int, M1: int, M2: int, i: int, s: int, ell: int) -> LaurentPoly:
    """Per-index factor of the collapsed form, for sigma(i) = s and l_i = ell."""
    w = ctx.omega_pow
    return (cpoch(ctx, ell, -M1, M1 + M2 + 1)
            * cpoch(ctx, ell, M2 + 1, s - 1)
            * cpoch(ctx, -ell, M1 + 1, n - s - 1)
            * w(ell * (n - i - s)))


def _eq7_prefactor(n: int, M1: int, M2: int) -> QFactored:
    pre = QFactored(_sign(comb(n - 1, 2)))
    for i in range(1, n):
        pre = pre / poch_qpow(1 - i + M1 + M2 + n, i - 1)
    return pre


def eq7_value(n: int, M1: int, M2: int) -> RatFunc:
    """Collapsed finite form summed over l_i in 1..n-1, exact in Q(w)."""
    ctx = _ctx(n)
    factors = {(i, s, ell): _eq7_factor(ctx, n, M1, M2, i, s, ell)
               for i in range(1, n) for s in range(1, n) for ell in range(1, n)}
    total = LaurentPoly()
    for sigma, sgn in _perms(n - 1):
        # the sum over l_1..l_(n-1) factorizes over i
        term = LaurentPoly.constant(sgn)
        for i in range(1, n):
            inner = LaurentPoly()
            for ell in range(1, n):
                inner = inner + factors[(i, sigma[i - 1], ell)]
            term = term * inner
        total = total + term
    return RatFunc(total * Fraction(1, n ** (n - 1))) * _eq7_prefactor(n, M1, M2)


def _rational_coeffs(p: LaurentPoly) -> bool:
    from .cyclotome import cy_is_rational
    return all(cy_is_rational(c) for _, c in p.items())


def verify_eq7(n: int, M1: int, M2: int) -> VerificationReport:
    _require_divisible(n, M1, M2)
    with timed() as clock:
        exact = eq5_value(n, M1, M2)
        value = eq7_value(n, M1, M2)
        rational = _rational_coeffs(value.num)
        ok = rational and value == exact
    witness = None
    if not ok:
        witness = ("numerator has irrational coefficients: " if not rational else "") + _diff_witness(value, exact)
    return _report("eq7", _label(n=n, M1=M1, M2=M2), ok, witness, clock.ms)


def verify_cancellation(n: int, M1: int, M2: int) -> VerificationReport:
    """Summands with a repeated l_r = l_s cancel in pairs over sigma and sigma o (rs)."""
    label = _label(n=n, M1=M1, M2=M2)
    if n < 3:
        return _report("cancel", label, None, "n < 3: no assignment of l_i with a repeat", 0)
    ctx = _ctx(n)
    with timed() as clock:
        factors = {(i, s, ell): _eq7_factor(ctx, n, M1, M2, i, s, ell)
                   for i in range(1, n) for s in range(1, n) for ell in range(1, n)}
        bad = []
        checked = 0
        for ells in itertools.product(range(1, n), repeat=n - 1):
            if len(set(ells)) == n - 1:
                continue
            checked += 1
            total = LaurentPoly()
            for sigma, sgn in _perms(n - 1):
                term = LaurentPoly.constant(sgn)
                for i in range(1, n):
                    term = term * factors[(i, sigma[i - 1], ells[i - 1])]
                total = total + term
            if not total.is_zero():
                bad.append(ells)
        ok = checked > 0 and not bad
    return _report("cancel", label, ok, None if ok else f"non-cancelling assignments: {bad}", clock.ms)


# ---------------------------------------------------------------------------
# determinants


def det(matrix: Sequence[Sequence]):
    """Determinant by cofactor expansion along the first row (exact, small sizes)."""
    n = len(matrix)
    if n == 0:
        return 1

    @lru_cache(maxsize=None)
    def minor(row: int, cols: tuple):
        if row == n:
            return 1
        total = 0
        for pos, c in enumerate(cols):
            entry = matrix[row][c]
            if not entry:
                continue
            sub = minor(row + 1, cols[:pos] + cols[pos + 1:])
            term = entry * sub
            total = total + term if pos % 2 == 0 else total - term
        return total

    return minor(0, tuple(range(n)))


@dataclass
class DetLemmaInstance:
    size: int
    X: list
    A: dict  # index j in 2..size
    B: dict


def det_lemma_matrix(inst: DetLemmaInstance) -> list:
    n = inst.size
    rows = []
    for i in range(n):
        row = []
        for j in range(1, n + 1):
            x = inst.X[i]
            e = 1
            for k in range(j + 1, n + 1):
                e = e * (x + inst.A[k])
            for k in range(2, j + 1):
                e = e * (x + inst.B[k])
            row.append(e)
        rows.append(row)
    return rows


def det_lemma_product(inst: DetLemmaInstance):
    n = inst.size
    out = 1
    for i in range(n):
        for j in range(i + 1, n):
            out = out * (inst.X[i] - inst.X[j])
    for i in range(2, n + 1):
        for j in range(i, n + 1):
            out = out * (inst.B[i] - inst.A[j])
    return out


def verify_det_lemma(inst: DetLemmaInstance) -> VerificationReport:
    with timed() as clock:
        lhs = det(det_lemma_matrix(inst))
        rhs = det_lemma_product(inst)
        ok = lhs == rhs
    label = _label(size=inst.size, X=[str(x) for x in inst.X],
                   A=[str(inst.A[j]) for j in range(2, inst.size + 1)],
                   B=[str(inst.B[j]) for j in range(2, inst.size + 1)])
    return _report("detlemma", label, ok, None if ok else f"det={lhs}; product={rhs}", clock.ms)


def _rand_rational(rng: random.Random, bound: int = 7) -> Fraction:
    while True:
        p = rng.randint(-bound, bound)
        if p:
            return Fraction(p, rng.randint(1, bound))


def random_det_instance(size: int, rng: random.Random) -> DetLemmaInstance:
    return DetLemmaInstance(size, [_rand_rational(rng) for _ in range(size)],
                            {j: _rand_rational(rng) for j in range(2, size + 1)},
                            {j: _rand_rational(rng) for j in range(2, size + 1)})


def _eq8_matrix(ctx: CycloContext, n: int, M1: int, M2: int, tau) -> list:
    w = ctx.omega_pow
    return [[cpoch(ctx, tau[i], M2 + 1, j - 1) * cpoch(ctx, -tau[i], M1 + 1, n - j - 1) * w(-j * tau[i])
             for j in range(1, n)] for i in range(n - 1)]


def _eq8_lemma_side(ctx: CycloContext, n: int, M1: int, M2: int, tau) -> LaurentPoly:
    """Row/column prefactor times the determinant-lemma product, with
    X_i = w^-tau(i), A_j = -q^(-M1-n+j), B_j = -q^(M2+j-1)."""
    w = ctx.omega_pow
    size = n - 1
    inst = DetLemmaInstance(
        size,
        [LaurentPoly.constant(w(-tau[i])) for i in range(size)],
        {j: LaurentPoly.monomial(-M1 - n + j, -1) for j in range(2, size + 1)},
        {j: LaurentPoly.monomial(M2 + j - 1, -1) for j in range(2, size + 1)},
    )
    pre = LaurentPoly.constant(_sign(comb(n - 1, 2)))
    for i in range(1, n):
        pre = pre * w(-tau[i - 1])
        pre = pre.shift(sum(M1 + t for t in range(1, n - i)))
    return pre * det_lemma_product(inst)


def eq8_value(n: int, M1: int, M2: int) -> RatFunc:
    """sum over tau of w^(sum tau(i)(n-i)) det(...), with the common prefactor."""
    ctx = _ctx(n)
    w = ctx.omega_pow
    total = LaurentPoly()
    for tau, _ in _perms(n - 1):
        phase = w(sum(tau[i - 1] * (n - i) for i in range(1, n)))
        total = total + det(_eq8_matrix(ctx, n, M1, M2, tau)) * phase
    return _eq8_common(ctx, n, M1, M2, total, with_sign=True)


def _eq8_common(ctx: CycloContext, n: int, M1: int, M2: int, body: LaurentPoly,
                with_sign: bool) -> RatFunc:
    w = ctx.omega_pow
    roots = ctx.one()
    for i in range(1, n):
        roots = roots * (1 - w(i))
    pre = (poch_qpow(-n * M1, M1, step=n) * poch_qpow(n, M2, step=n)
           / (poch_qpow(-M1, M1) * qfact(M2)))
    if with_sign:
        pre = pre * _eq7_prefactor(n, M1, M2)
    else:
        pre = pre * _eq7_prefactor(n, M1, M2) * QFactored(_sign(comb(n - 1, 2)))
    return RatFunc(body * (roots * Fraction(1, n ** (n - 1)))) * pre


def eq8_double_sum(n: int, M1: int, M2: int) -> RatFunc:
    """The sum over sigma, tau left after the cancellation (l_i = tau(i))."""
    ctx = _ctx(n)
    w = ctx.omega_pow
    total = LaurentPoly()
    for sigma, sgn in _perms(n - 1):
        for tau, _ in _perms(n - 1):
            term = LaurentPoly.constant(sgn)
            for i in range(1, n):
                s, t = sigma[i - 1], tau[i - 1]
                term = (term * cpoch(ctx, t, M2 + 1, s - 1) * cpoch(ctx, -t, M1 + 1, n - s - 1)
                        * w(t * (n - i - s)))
            total = total + term
    return _eq8_common(ctx, n, M1, M2, total, with_sign=True)


def verify_eq8(n: int, M1: int, M2: int) -> VerificationReport:
    """Per-tau determinant equals the lemma evaluation; the surviving double sum
    equals its determinant form and the exact value of the (n-1)-fold sum."""
    if n - 1 > 6:
        raise DomainError("determinant size limited to n - 1 <= 6")
    label = _label(n=n, M1=M1, M2=M2)
    ctx = _ctx(n)
    with timed() as clock:
        bad = []
        for tau, _ in _perms(n - 1):
            lhs = det(_eq8_matrix(ctx, n, M1, M2, tau))
            rhs = _eq8_lemma_side(ctx, n, M1, M2, tau)
            if lhs != rhs:
                bad.append(f"tau={tau}: det={lhs}; lemma={rhs}")
        double = eq8_double_sum(n, M1, M2)
        detform = eq8_value(n, M1, M2)
        if double != detform:
            bad.append("double sum != determinant form: " + _diff_witness(double, detform))
        if M1 % n == 0 and M2 % n == 0:
            exact = eq5_value(n, M1, M2)
            if detform != exact:
                bad.append("determinant form != exact sum: " + _diff_witness(detform, exact))
        ok = not bad
    return _report("eq8", label, ok, "; ".join(bad) or None, clock.ms)


def eq9_value(n: int, M1: int, M2: int, vandermonde_form: bool = False) -> RatFunc:
    ctx = _ctx(n)
    w = ctx.omega_pow
    if not vandermonde_form:
        body = ctx.zero()
        for tau, _ in _perms(n - 1):
            t = w(sum(tau[i - 1] * (n - i - 1) for i in range(1, n)))
            for i in range(1, n):
                for j in range(i + 1, n):
                    t = t * (w(-tau[i - 1]) - w(-tau[j - 1]))
            body = body + t
    else:
        body = ctx.zero()
        for tau, sgn in _perms(n - 1):
            body = body + w(sum(tau[i - 1] * (n - i - 1) for i in range(1, n))) * sgn
        for i in range(1, n):
            for j in range(i + 1, n):
                body = body * (w(-i) - w(-j))
    roots = ctx.one()
    for i in range(1, n):
        roots = roots * (1 - w(i))
    pre = (poch_qpow(-n * M1, M1, step=n) * poch_qpow(n, M2, step=n)
           / (poch_qpow(-M1, M1) * qfact(M2)))
    return RatFunc(LaurentPoly.constant(body * roots * Fraction(1, n ** (n - 1)))) * pre


def eq10_value(n: int, M1: int, M2: int) -> RatFunc:
    ctx = _ctx(n)
    w = ctx.omega_pow
    c = ctx.one()
    for i in range(1, n):
        c = c * (1 - w(i))
    for i in range(1, n):
        for j in range(i + 1, n):
            c = c * (w(-i) - w(-j)) * (w(i) - w(j))
    return gaussian(M1, M2) * (c * Fraction(1, n ** (n - 1)))


def verify_eq9_eq10(n: int, M1: int, M2: int) -> VerificationReport:
    _require_divisible(n, M1, M2)
    with timed() as clock:
        bad = []
        first = eq9_value(n, M1, M2)
        second = eq9_value(n, M1, M2, vandermonde_form=True)
        if first != second:
            bad.append("tau-sum != Vandermonde form")
        if eq8_value(n, M1, M2) != first:
            bad.append("determinant-lemma substitution differs from the tau-sum form")
        ctx = _ctx(n)
        w = ctx.omega_pow
        vsum = ctx.zero()
        for tau, sgn in _perms(n - 1):
            vsum = vsum + w(sum(tau[i - 1] * (n - i - 1) for i in range(1, n))) * sgn
        vprod = ctx.one()
        for i in range(1, n):
            for j in range(i + 1, n):
                vprod = vprod * (w(i) - w(j))
        if vsum != vprod:
            bad.append(f"Vandermonde sum {vsum} != product {vprod}")
        whole = second * eq4_prefactor(n, M1, M2)
        ten = eq10_value(n, M1, M2)
        if whole != ten:
            bad.append("prefactor times eq9 != eq10: " + _diff_witness(whole, ten))
        if not _rational_coeffs(ten.num):
            bad.append("eq10 value not rational")
        if ten != gaussian(M1, M2):
            bad.append("eq10 != (q;q)_(M1+M2)/((q;q)_M1 (q;q)_M2): " + _diff_witness(ten, gaussian(M1, M2)))
        ok = not bad
    return _report("eq9", _label(n=n, M1=M1, M2=M2), ok, "; ".join(bad) or None, clock.ms)


# ---------------------------------------------------------------------------
# Milne's A_l extension of Watson's transformation at rational points


@dataclass
class MilneParams:
    l: int
    N: tuple
    a: Fraction
    b: Fraction
    c: Fraction
    d: Fraction
    e: Fraction
    x: tuple  # x_1..x_(l+1)
    q0: Fraction
    M: int = 0

    def label(self) -> str:
        f = lambda v: str(v)
        return (f"l={self.l},N={list(self.N)},a={f(self.a)},b={f(self.b)},c={f(self.c)},"
                f"d={f(self.d)},e={f(self.e)},x={[f(v) for v in self.x]},q={f(self.q0)},M={self.M}")


def rpoch(a: Fraction, q: Fraction, k: int) -> Fraction:
    """(a; q)_k for rational a, q and any integer k."""
    out = Fraction(1)
    if k >= 0:
        for j in range(k):
            out *= 1 - a * q ** j
    else:
        for j in range(1, -k + 1):
            out /= 1 - a / q ** j
    return out


def _box(N):
    return itertools.product(*[range(n + 1) for n in N])


def _milne_common(k, x, N, q, l) -> Fraction:
    t = Fraction(1)
    for r in range(l):
        for s in range(r + 1, l):
            t *= (1 - x[r] / x[s] * q ** (k[r] - k[s])) / (1 - x[r] / x[s])
    for r in range(l):
        for s in range(l):
            t *= rpoch(x[r] / x[s] * q ** (-N[s]), q, k[r]) / rpoch(q * x[r] / x[s], q, k[r])
    return t


def milne_lhs(mp: MilneParams) -> Fraction:
    l, N, q, x = mp.l, mp.N, mp.q0, mp.x
    a, b, c, d, e = mp.a, mp.b, mp.c, mp.d, mp.e
    total = Fraction(0)
    for k in _box(N):
        K = sum(k)
        t = _milne_common(k, x, N, q, l)
        for i in range(l):
            u = x[i] / x[l - 1]
            t *= (1 - u * a * q ** (k[i] + K)) / (1 - u * a)
            t *= rpoch(u * a, q, K) / rpoch(u * a * q ** (1 + N[i]), q, K)
            t *= (rpoch(u * c, q, k[i]) * rpoch(u * d, q, k[i])
                  / (rpoch(u * a * q / b, q, k[i]) * rpoch(u * a * q / e, q, k[i])))
        t *= rpoch(b, q, K) * rpoch(e, q, K) / (rpoch(a * q / c, q, K) * rpoch(a * q / d, q, K))
        t *= (a * a * q ** (1 + sum(N)) / (b * c * d * e)) ** K * q ** sum(i * v for i, v in enumerate(k, 1))
        total += t
    return total


def milne_rhs(mp: MilneParams) -> Fraction:
    l, N, q, x = mp.l, mp.N, mp.q0, mp.x
    a, b, c, d, e = mp.a, mp.b, mp.c, mp.d, mp.e
    NN = sum(N)
    pre = rpoch(a * q / (d * e), q, NN) / rpoch(a * q / d, q, NN)
    for i in range(l):
        u = x[i] / x[l - 1]
        pre *= rpoch(u * a * q, q, N[i]) / rpoch(u * a * q / e, q, N[i])
    total = Fraction(0)
    for k in _box(N):
        K = sum(k)
        t = q ** sum(i * v for i, v in enumerate(k, 1)) * _milne_common(k, x, N, q, l)
        for i in range(l):
            u = x[i] / x[l - 1]
            t *= rpoch(u * d, q, k[i]) / rpoch(u * a * q / b, q, k[i])
        t *= (rpoch(a * q / (b * c), q, K) * rpoch(e, q, K)
              / (rpoch(a * q / c, q, K) * rpoch(d * e / a * q ** (-NN), q, K)))
        total += t
    return pre * total


def milne_mod_lhs(mp: MilneParams) -> Fraction:
    """Reversed form with k_(l+1) = M - k_1 - ... - k_l (negative values allowed)."""
    l, N, q, x, M = mp.l, mp.N, mp.q0, mp.x, mp.M
    b, c, d, e = mp.b, mp.c, mp.d, mp.e
    xl, xl1 = x[l - 1], x[l]
    pre = q ** M
    for i in range(l):
        pre *= rpoch(q * xl1 / x[i], q, M) / rpoch(xl1 / x[i] * q ** (-N[i]), q, M)
    pre *= (rpoch(q ** (1 - M) / b, q, M) * rpoch(q ** (1 - M) / e, q, M)
            / (rpoch(xl1 / xl * c, q, M) * rpoch(xl1 / xl * d, q, M)))
    for i in range(l):
        pre *= (1 - x[i] / xl1) / (1 - x[i] / (q ** M * xl1))
    total = Fraction(0)
    for head in _box(N):
        k = list(head) + [M - sum(head)]
        t = q ** (-sum(i * v for i, v in enumerate(k, 1)))
        for r in range(l + 1):
            for s in range(r + 1, l + 1):
                t *= (1 - x[s] / x[r] * q ** (k[s] - k[r])) / (1 - x[s] / x[r])
        for r in range(l + 1):
            for s in range(l):
                t *= rpoch(x[r] / x[s] * q ** (-N[s]), q, k[r]) / rpoch(q * x[r] / x[s], q, k[r])
        for i in range(l + 1):
            t *= (rpoch(x[i] / xl * c, q, k[i]) * rpoch(x[i] / xl * d, q, k[i])
                  / (rpoch(x[i] / xl1 * q ** (1 - M) / b, q, k[i])
                     * rpoch(x[i] / xl1 * q ** (1 - M) / e, q, k[i])))
        total += t
    return pre * total


def milne_mod_rhs(mp: MilneParams) -> Fraction:
    l, N, q, x, M = mp.l, mp.N, mp.q0, mp.x, mp.M
    b, c, d, e = mp.b, mp.c, mp.d, mp.e
    xl, xl1 = x[l - 1], x[l]
    NN = sum(N)
    r = q ** (1 - M) * xl / xl1
    pre = rpoch(r / (d * e), q, NN) / rpoch(r / d, q, NN)
    for i in range(l):
        pre *= rpoch(x[i] / xl1 * q ** (1 - M), q, N[i]) / rpoch(x[i] / xl1 * q ** (1 - M) / e, q, N[i])
    total = Fraction(0)
    for k in _box(N):
        K = sum(k)
        t = q ** sum(i * v for i, v in enumerate(k, 1)) * _milne_common(k, x, N, q, l)
        for i in range(l):
            t *= rpoch(x[i] / xl * d, q, k[i]) / rpoch(x[i] / xl1 * q ** (1 - M) / b, q, k[i])
        t *= (rpoch(r / (b * c), q, K) * rpoch(e, q, K)
              / (rpoch(r / c, q, K) * rpoch(d * e * q ** M * xl1 / xl * q ** (-NN), q, K)))
        total += t
    return pre * total


def _rational_check(case: str, mp: MilneParams, lhs_fn, rhs_fn) -> VerificationReport:
    with timed() as clock:
        try:
            lhs, rhs = lhs_fn(mp), rhs_fn(mp)
        except ZeroDivisionError:
            lhs = rhs = None
    if lhs is None:
        return _report(case, mp.label(), None, "vanishing denominator at this point", clock.ms)
    ok = lhs == rhs
    return _report(case, mp.label(), ok, None if ok else f"lhs={lhs}; rhs={rhs}", clock.ms)


def verify_milne_watson(mp: MilneParams) -> VerificationReport:
    return _rational_check("milne", mp, milne_lhs, milne_rhs)


def verify_milne_mod(mp: MilneParams) -> VerificationReport:
    expected_a = mp.x[mp.l - 1] / (mp.q0 ** mp.M * mp.x[mp.l])
    if mp.a != expected_a:
        raise ParameterError("the reversed form needs a = x_l / (q^M x_(l+1))")
    return _rational_check("milne-mod", mp, milne_mod_lhs, milne_mod_rhs)


def random_milne_params(l: int, N: Sequence[int], rng: random.Random, M: int | None = None) -> MilneParams:
    """Random point with small rationals; q avoids 0 and +-1.

    With ``M`` given, ``a`` is tied to the x's as the reversed form requires.
    """
    b, c, d, e, a = (_rand_rational(rng) for _ in range(5))
    x = tuple(_rand_rational(rng) for _ in range(l + 1))
    q0 = _rand_rational(rng)
    while q0 in (1, -1):
        q0 = _rand_rational(rng)
    if M is not None:
        a = x[l - 1] / (q0 ** M * x[l])
    return MilneParams(l, tuple(N), a, b, c, d, e, x, q0, M or 0)


def milne_point(l: int, N: Sequence[int], idx: int, seed: int, mod_M: int | None = None,
                max_attempts: int = 100) -> VerificationReport:
    """Check at the ``idx``-th seeded point, resampling degenerate points.

    Each point draws from its own sub-seed so results do not depend on order.
    """
    verify = verify_milne_watson if mod_M is None else verify_milne_mod
    rep = None
    for attempt in range(max_attempts):
        rng = random.Random(f"{seed}:{l}:{tuple(N)}:{mod_M}:{idx}:{attempt}")
        rep = verify(random_milne_params(l, N, rng, mod_M))
        if rep.status != INDETERMINATE:
            return rep
    return rep


def milne_reports(l: int, N: Sequence[int], points: int, seed: int,
                  mod_M: int | None = None) -> list[VerificationReport]:
    return [milne_point(l, N, idx, seed, mod_M) for idx in range(points)]
