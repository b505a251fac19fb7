"""Truncated formal Laurent series in q.

A :class:`TruncSeries` knows its coefficients exactly for every exponent up
to ``order``; beyond that nothing is assumed.  ``order`` may be
``math.inf`` for an exact (finite) expansion.  Coefficients are ints,
Fractions or :class:`~qsum.cyclotome.CycloElem`.
"""
from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache

from .cyclotome import CycloContext, CycloElem
from .qcore import LaurentPoly, RatFunc, binomial_product

INF = math.inf


class NonInvertibleLeadingCoeff(ArithmeticError):
    pass


class VanishingFactor(ArithmeticError):
    """An infinite product contains the factor (1 - 1)."""


def _inv(c):
    if isinstance(c, CycloElem):
        return c.inverse()
    if isinstance(c, int):
        if c in (1, -1):
            return c
        return Fraction(1, c)
    return 1 / c


class TruncSeries:
    __slots__ = ("order", "coeffs")

    def __init__(self, coeffs: dict | None = None, order=INF):
        self.order = order
        self.coeffs = {e: c for e, c in (coeffs or {}).items() if c and e <= order}

    @classmethod
    def from_poly(cls, p: LaurentPoly, order=INF) -> "TruncSeries":
        return cls(p.terms, order)

    @classmethod
    def one(cls, order=INF) -> "TruncSeries":
        return cls({0: 1}, order)

    @property
    def low_exp(self):
        """Lowest exponent with a nonzero coefficient (order+1 when none is known)."""
        return min(self.coeffs) if self.coeffs else self.order + 1

    def __getitem__(self, e: int):
        if e > self.order:
            raise IndexError(f"coefficient q^{e} lies beyond the truncation order {self.order}")
        return self.coeffs.get(e, 0)

    def truncate(self, order) -> "TruncSeries":
        return TruncSeries(self.coeffs, min(order, self.order))

    def __add__(self, other):
        if not isinstance(other, TruncSeries):
            other = TruncSeries({0: other})
        order = min(self.order, other.order)
        out = {e: c for e, c in self.coeffs.items() if e <= order}
        for e, c in other.coeffs.items():
            if e <= order:
                out[e] = out.get(e, 0) + c
        return TruncSeries(out, order)

    __radd__ = __add__

    def __neg__(self):
        return TruncSeries({e: -c for e, c in self.coeffs.items()}, self.order)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c) -> "TruncSeries":
        return TruncSeries({e: v * c for e, v in self.coeffs.items()}, self.order)

    def shift(self, k: int) -> "TruncSeries":
        return TruncSeries({e + k: c for e, c in self.coeffs.items()}, self.order + k)

    def __mul__(self, other):
        if not isinstance(other, TruncSeries):
            return self.scale(other)
        order = min(self.order + other.low_exp, other.order + self.low_exp)
        out: dict = {}
        get = out.get
        for ea, ca in self.coeffs.items():
            for eb, cb in other.coeffs.items():
                e = ea + eb
                if e <= order:
                    out[e] = get(e, 0) + ca * cb
        return TruncSeries(out, order)

    __rmul__ = __mul__

    def inverse(self, order=None) -> "TruncSeries":
        """Series inverse, solved coefficient by coefficient.

        For an exact input ``order`` must be given (the inverse is infinite).
        """
        if not self.coeffs:
            raise NonInvertibleLeadingCoeff("series is zero up to its order")
        v = self.low_exp
        lead = self.coeffs[v]
        try:
            lead_inv = _inv(lead)
        except ZeroDivisionError as exc:
            raise NonInvertibleLeadingCoeff(str(exc)) from exc
        target = self.order - 2 * v
        if order is not None:
            target = min(target, order)
        if target == INF:
            raise ValueError("inverse of an exact series needs an explicit order")
        rel = {e - v: c for e, c in self.coeffs.items()}
        n = int(target + v)  # number of relative coefficients beyond the first
        if n < 0:
            return TruncSeries({}, target)
        inv = [0] * (n + 1)
        inv[0] = lead_inv
        for k in range(1, n + 1):
            acc = 0
            for j in range(1, k + 1):
                c = rel.get(j)
                if c and inv[k - j]:
                    acc = acc + c * inv[k - j]
            if acc:
                inv[k] = -acc * lead_inv
        return TruncSeries({k - v: c for k, c in enumerate(inv)}, target)

    def __truediv__(self, other):
        if not isinstance(other, TruncSeries):
            return self.scale(_inv(other))
        if self.order == INF and other.order == INF:
            raise ValueError("division of exact series needs truncate() first")
        v = other.low_exp
        order = min(self.order - v, other.order - 2 * v + self.low_exp)
        if not self.coeffs:
            if not other.coeffs:
                raise NonInvertibleLeadingCoeff("series is zero up to its order")
            return TruncSeries({}, order)
        return (self * other.inverse(order - self.low_exp)).truncate(order)

    def agree(self, other) -> tuple[bool, object]:
        """Compare up to the common order; returns (equal, certified order)."""
        order = min(self.order, other.order)
        keys = {e for e in self.coeffs if e <= order} | {e for e in other.coeffs if e <= order}
        ok = all(self.coeffs.get(e, 0) == other.coeffs.get(e, 0) for e in keys)
        return ok, order

    def __eq__(self, other):
        if not isinstance(other, TruncSeries):
            return NotImplemented
        return self.agree(other)[0]

    __hash__ = None

    def to_poly(self) -> LaurentPoly:
        return LaurentPoly(self.coeffs)

    def __repr__(self):
        return f"TruncSeries({LaurentPoly(self.coeffs)} + O(q^{self.order + 1}))"


def ts_arith(a: TruncSeries, b: TruncSeries, op: str) -> TruncSeries:
    if op == "add":
        return a + b
    if op == "mul":
        return a * b
    if op == "div":
        return a / b
    raise ValueError(f"unknown op {op!r}")


def _root_coeff(ctx: CycloContext | None, ell: int):
    if ctx is None:
        if ell:
            raise ValueError("a nonzero root-of-unity power needs a cyclotomic context")
        return 1
    if ell % ctx.n == 0:
        return 1
    return ctx.omega_pow(ell)


def _is_one(c) -> bool:
    return c == 1


def poch_prefix(ctx: CycloContext | None, ell: int, s: int) -> tuple[LaurentPoly, int, int]:
    """Split ``(w^ell q^s; q)_inf`` at exponent 1.

    Returns ``(prefix, zeros, start)``: the finite product of factors with
    exponent <= 0 (vanishing ``1 - 1`` factors removed), the number of removed
    vanishing factors, and the first exponent of the remaining tail.
    """
    c = _root_coeff(ctx, ell)
    prefix = LaurentPoly.constant(1)
    zeros = 0
    for t in range(s, 1):
        if t == 0 and _is_one(c):
            zeros += 1
            continue
        prefix = prefix * (LaurentPoly.constant(1) - LaurentPoly.monomial(t, c))
    return prefix, zeros, max(s, 1)


@lru_cache(maxsize=2048)
def poch_tail(ctx: CycloContext | None, ell: int, start: int, order: int) -> TruncSeries:
    """``(w^ell q^start; q)_inf`` for ``start >= 1``, truncated at ``order``."""
    if start < 1:
        raise ValueError("tail must start at a positive exponent")
    c = _root_coeff(ctx, ell)
    buf = [0] * (order + 1)
    buf[0] = 1
    for t in range(start, order + 1):
        for e in range(order, t - 1, -1):
            if buf[e - t]:
                buf[e] = buf[e] - c * buf[e - t]
    return TruncSeries({e: x for e, x in enumerate(buf)}, order)


def inf_poch(ctx: CycloContext | None, ell: int, s: int, T: int) -> TruncSeries:
    """``(w^ell q^s; q)_inf`` known exactly up to ``q^T``."""
    prefix, zeros, start = poch_prefix(ctx, ell, s)
    if zeros:
        raise VanishingFactor(f"(w^{ell} q^{s}; q)_inf contains the factor 1 - 1")
    low = prefix.valuation()
    tail = poch_tail(ctx, ell, start, max(T - low, 0))
    return (TruncSeries.from_poly(prefix) * tail).truncate(T)


def poch_ratio_series(ctx: CycloContext | None, num: list[tuple[int, int]],
                      den: list[tuple[int, int]], T: int) -> TruncSeries:
    """``prod (w^l q^s; q)_inf / prod (w^l q^s; q)_inf`` for pairs ``(l, s)``, to order T.

    Vanishing factors are counted on both sides and cancelled; an excess in
    the numerator gives the zero series, an excess in the denominator raises.
    """
    pn, pd = LaurentPoly.constant(1), LaurentPoly.constant(1)
    zn = zd = 0
    tails_n, tails_d = [], []
    for ell, s in num:
        p, z, start = poch_prefix(ctx, ell, s)
        pn, zn = pn * p, zn + z
        tails_n.append((ell, start))
    for ell, s in den:
        p, z, start = poch_prefix(ctx, ell, s)
        pd, zd = pd * p, zd + z
        tails_d.append((ell, start))
    if zd > zn:
        raise VanishingFactor("denominator vanishes to higher order than numerator")
    if zn > zd:
        return TruncSeries({}, T)
    work = max(T - pn.valuation() + pd.valuation(), T)
    a = TruncSeries.from_poly(pn)
    for ell, start in tails_n:
        a = a * poch_tail(ctx, ell, start, work)
    b = TruncSeries.from_poly(pd)
    for ell, start in tails_d:
        b = b * poch_tail(ctx, ell, start, work)
    out = a / b
    assert out.order >= T, (out.order, T)
    return out.truncate(T)


def ratfunc_series(f: RatFunc, T: int) -> TruncSeries:
    """Expansion of a binomial-denominator rational function up to ``q^T``."""
    if f.num.is_zero():
        return TruncSeries({}, T)
    work = T - min(0, f.num.valuation())
    den = TruncSeries.from_poly(binomial_product(f.den), work)
    out = TruncSeries.from_poly(f.num, work) / den
    return out.truncate(T)


def n_section(f: TruncSeries, n: int, r: int) -> TruncSeries:
    """Terms of ``f`` whose exponent is congruent to ``r`` mod ``n``."""
    if not 0 <= r < n:
        raise ValueError("residue out of range")
    return TruncSeries({e: c for e, c in f.coeffs.items() if e % n == r}, f.order)


def n_section_by_roots(f: TruncSeries, ctx: CycloContext, r: int) -> TruncSeries:
    """``(1/n) sum_l w^(-r l) f(w^l q)`` computed in Q(w)."""
    n = ctx.n
    if not 0 <= r < n:
        raise ValueError("residue out of range")
    total = TruncSeries({}, f.order)
    w = ctx.omega_pow
    for ell in range(n):
        twisted = TruncSeries({e: c * w(ell * e) for e, c in f.coeffs.items()}, f.order)
        total = total + twisted.scale(w(-r * ell))
    return total.scale(Fraction(1, n))
