"""Exact arithmetic substrate.

Rationals are :class:`fractions.Fraction`.  :class:`LaurentPoly` is a sparse
Laurent polynomial in ``q`` over any exact commutative ring whose elements
support ``+ - *``, ``==`` and truthiness (ints, Fractions, CycloElem).
:class:`QFactored` stores ``sign * q**e * prod (1 - q**j)**mu_j`` together
with a zero order, which is how every Pochhammer ratio in this package is
represented before expansion.  :class:`RatFunc` is a numerator polynomial over
a denominator of the form ``prod (1 - q**j)**m_j``.
"""
from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Mapping

Rational = Fraction


class ZeroBase(ZeroDivisionError):
    """Evaluation at q = 0 of a polynomial with negative exponents."""


class PoleError(ArithmeticError):
    """The factored value has a pole (negative zero order)."""


class NotPolynomial(ArithmeticError):
    """The factored value is not a Laurent polynomial."""


class PoleOrZero(ArithmeticError):
    """Splitting requires a finite nonzero value."""


def _norm(c):
    # Keep integral Fractions as ints: int arithmetic is much faster.
    if type(c) is Fraction and c.denominator == 1:
        return c.numerator
    return c


class LaurentPoly:
    """Immutable sparse Laurent polynomial ``sum c_e q**e``."""

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms: Mapping[int, object] | None = None):
        if terms:
            self._terms = {e: c for e, c in terms.items() if c}
        else:
            self._terms = {}
        self._hash = None

    @classmethod
    def _raw(cls, terms: dict) -> "LaurentPoly":
        p = object.__new__(cls)
        p._terms = terms
        p._hash = None
        return p

    @classmethod
    def monomial(cls, e: int, c=1) -> "LaurentPoly":
        return cls._raw({e: c} if c else {})

    @classmethod
    def constant(cls, c) -> "LaurentPoly":
        return cls.monomial(0, c)

    @classmethod
    def from_dense(cls, coeffs: Iterable, low: int = 0) -> "LaurentPoly":
        return cls._raw({low + i: c for i, c in enumerate(coeffs) if c})

    @property
    def terms(self) -> dict:
        return dict(self._terms)

    def items(self):
        return sorted(self._terms.items())

    def coeff(self, e: int):
        return self._terms.get(e, 0)

    def is_zero(self) -> bool:
        return not self._terms

    def __bool__(self):
        return bool(self._terms)

    def degree(self) -> int | None:
        return max(self._terms) if self._terms else None

    def valuation(self) -> int | None:
        return min(self._terms) if self._terms else None

    def __len__(self):
        return len(self._terms)

    # ring operations
    @staticmethod
    def _coerce(other):
        if isinstance(other, LaurentPoly):
            return other
        return LaurentPoly.constant(other)

    def __add__(self, other):
        other = self._coerce(other)
        out = dict(self._terms)
        for e, c in other._terms.items():
            v = out.get(e)
            if v is None:
                out[e] = c
            else:
                v = v + c
                if v:
                    out[e] = v
                else:
                    del out[e]
        return LaurentPoly._raw(out)

    __radd__ = __add__

    def __neg__(self):
        return LaurentPoly._raw({e: -c for e, c in self._terms.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, LaurentPoly):
            if not other:
                return LaurentPoly()
            return LaurentPoly._raw(
                {e: v for e, c in self._terms.items() if (v := c * other)}
            )
        a, b = self._terms, other._terms
        if len(a) < len(b):
            a, b = b, a
        out: dict = {}
        get = out.get
        for eb, cb in b.items():
            for ea, ca in a.items():
                e = ea + eb
                out[e] = get(e, 0) + ca * cb
        return LaurentPoly._raw({e: c for e, c in out.items() if c})

    def __rmul__(self, other):
        return self * other

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative power of a Laurent polynomial")
        result = LaurentPoly.constant(1)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def shift(self, k: int) -> "LaurentPoly":
        """Multiply by ``q**k``."""
        return LaurentPoly._raw({e + k: c for e, c in self._terms.items()})

    def map_coeffs(self, fn) -> "LaurentPoly":
        return LaurentPoly({e: fn(c) for e, c in self._terms.items()})

    def __eq__(self, other):
        if not isinstance(other, LaurentPoly):
            other = LaurentPoly.constant(other) if not isinstance(other, str) else None
            if other is None:
                return NotImplemented
        a, b = self._terms, other._terms
        if a.keys() != b.keys():
            return False
        return all(a[e] == b[e] for e in a)

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self._terms.items()))
        return self._hash

    def eval(self, q0):
        """Exact value at ``q = q0``."""
        if not self._terms:
            return 0
        if q0 == 0:
            if min(self._terms) < 0:
                raise ZeroBase("q0 = 0 with negative exponents present")
            return self._terms.get(0, 0)
        q0 = Fraction(q0)
        return sum((c * q0**e for e, c in self._terms.items()), Fraction(0))

    def __repr__(self):
        return f"LaurentPoly({self})"

    def __str__(self):
        if not self._terms:
            return "0"
        parts = []
        for e, c in sorted(self._terms.items()):
            cs = str(c)
            if e == 0:
                parts.append(f"({cs})" if " " in cs or "/" in cs else cs)
            else:
                mono = "q" if e == 1 else f"q^{e}"
                if c == 1:
                    parts.append(mono)
                elif c == -1:
                    parts.append(f"-{mono}")
                else:
                    parts.append(f"({cs})*{mono}")
        return " + ".join(parts).replace("+ -", "- ")


def lp_arith(a: LaurentPoly, b: LaurentPoly, op: str) -> LaurentPoly:
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    raise ValueError(f"unknown op {op!r}")


def lp_eval(f: LaurentPoly, q0) -> Fraction:
    return Fraction(f.eval(q0))


Q = LaurentPoly.monomial(1)
ONE = LaurentPoly.constant(1)
ZERO = LaurentPoly()


# ---------------------------------------------------------------------------
# factored q-expressions


class QFactored:
    """``sign * q**exp * prod_j (1 - q**j)**mu_j``, with ``zero_order``.

    ``zero_order`` is the net multiplicity of the factor ``(1 - q**0)``:
    positive means the value is exactly 0, negative means a pole.
    """

    __slots__ = ("sign", "exp", "factors", "zero_order")

    def __init__(self, sign: int = 1, exp: int = 0,
                 factors: Mapping[int, int] | Iterable[tuple[int, int]] = (),
                 zero_order: int = 0):
        if sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")
        items = factors.items() if isinstance(factors, Mapping) else factors
        fs = {}
        for j, mu in items:
            if j < 1:
                raise ValueError("factor keys must be positive")
            fs[j] = fs.get(j, 0) + mu
        self.sign = sign
        self.exp = exp
        self.factors = tuple(sorted((j, mu) for j, mu in fs.items() if mu))
        self.zero_order = zero_order

    @classmethod
    def unit(cls) -> "QFactored":
        return cls()

    @classmethod
    def monomial(cls, e: int, sign: int = 1) -> "QFactored":
        return cls(sign, e)

    @classmethod
    def binomial(cls, t: int) -> "QFactored":
        """The single factor ``1 - q**t``, normalized."""
        if t == 0:
            return cls(zero_order=1)
        if t > 0:
            return cls(factors=((t, 1),))
        return cls(-1, t, ((-t, 1),))

    @property
    def is_zero(self) -> bool:
        return self.zero_order > 0

    @property
    def is_pole(self) -> bool:
        return self.zero_order < 0

    def factor_dict(self) -> dict:
        return dict(self.factors)

    def __mul__(self, other: "QFactored") -> "QFactored":
        fs = dict(self.factors)
        for j, mu in other.factors:
            fs[j] = fs.get(j, 0) + mu
        return QFactored(self.sign * other.sign, self.exp + other.exp, fs,
                         self.zero_order + other.zero_order)

    def inverse(self) -> "QFactored":
        return QFactored(self.sign, -self.exp, [(j, -mu) for j, mu in self.factors],
                         -self.zero_order)

    def __truediv__(self, other: "QFactored") -> "QFactored":
        return self * other.inverse()

    def __pow__(self, k: int) -> "QFactored":
        return QFactored(self.sign ** abs(k), self.exp * k,
                         [(j, mu * k) for j, mu in self.factors], self.zero_order * k)

    def __eq__(self, other):
        if not isinstance(other, QFactored):
            return NotImplemented
        return (self.sign, self.exp, self.factors, self.zero_order) == (
            other.sign, other.exp, other.factors, other.zero_order)

    def __hash__(self):
        return hash((self.sign, self.exp, self.factors, self.zero_order))

    def __repr__(self):
        fs = "".join(f"(1-q^{j})^{mu}" for j, mu in self.factors)
        return f"QFactored({'-' if self.sign < 0 else '+'}q^{self.exp}{fs}, z={self.zero_order})"


def qf_mul(a: QFactored, b: QFactored) -> QFactored:
    return a * b


def qf_div(a: QFactored, b: QFactored) -> QFactored:
    return a / b


def poch_qpow(s: int, k: int, step: int = 1) -> QFactored:
    """``(q**s; q**step)_k`` in factored form, for any integer k."""
    sign, exp, zero = 1, 0, 0
    fs: dict = {}
    if k >= 0:
        exps = [s + step * j for j in range(k)]
        power = 1
    else:
        exps = [s - step * j for j in range(1, -k + 1)]
        power = -1
    for t in exps:
        if t == 0:
            zero += 1
        elif t > 0:
            fs[t] = fs.get(t, 0) + 1
        else:
            sign = -sign
            exp += t
            fs[-t] = fs.get(-t, 0) + 1
    out = QFactored(sign, exp, fs, zero)
    return out if power == 1 else out.inverse()


def qfact(n: int) -> QFactored:
    """``(q; q)_n``."""
    return poch_qpow(1, n)


# ---------------------------------------------------------------------------
# expansion


@lru_cache(maxsize=None)
def _cyclo_int(d: int) -> tuple:
    from .cyclotome import cyclotomic_poly
    return tuple(cyclotomic_poly(d))


def _divisors(j: int) -> list:
    return [d for d in range(1, j + 1) if j % d == 0]


def cyclotomic_multiplicities(factors) -> dict:
    """Rewrite ``prod (1 - q**j)**mu_j`` in the basis of cyclotomic polynomials.

    ``1 - q**j = -prod_{d | j} Phi_d(q)``; the returned map is ``d -> nu_d``.
    The value is a polynomial exactly when every ``nu_d >= 0``.
    """
    nu: dict = {}
    for j, mu in factors:
        for d in _divisors(j):
            nu[d] = nu.get(d, 0) + mu
    return nu


def _dense_expand(factors) -> list:
    """Dense int coefficients of ``prod (1 - q**j)**mu_j`` (known polynomial).

    Positive factors are multiplied in first; negative ones are then removed
    by the recurrence ``c[i] = p[i] + c[i - j]``, which is exact because the
    cyclotomic multiplicities were checked beforehand.
    """
    buf = [0] * (1 + sum(j * mu for j, mu in factors if mu > 0))
    buf[0] = 1
    top = 0
    for j, mu in factors:
        for _ in range(max(mu, 0)):
            top += j
            for i in range(top, j - 1, -1):
                buf[i] -= buf[i - j]
    for j, mu in factors:
        for _ in range(max(-mu, 0)):
            for i in range(j, top + 1):
                buf[i] += buf[i - j]
            top -= j
    if any(buf[top + 1:]):
        raise NotPolynomial("inexact division in expansion")
    return buf[: top + 1]


@lru_cache(maxsize=4096)
def _expand_cached(factors: tuple) -> LaurentPoly:
    return LaurentPoly.from_dense(_dense_expand(factors))


def qf_expand(t: QFactored) -> LaurentPoly:
    if t.zero_order > 0:
        return LaurentPoly()
    if t.zero_order < 0:
        raise PoleError(repr(t))
    if any(mu < 0 for mu in cyclotomic_multiplicities(t.factors).values()):
        raise NotPolynomial(repr(t))
    base = _expand_cached(t.factors)
    if t.sign < 0:
        base = -base
    return base.shift(t.exp) if t.exp else base


def qf_split(t: QFactored) -> tuple[LaurentPoly, LaurentPoly]:
    """Numerator and denominator polynomials of a finite nonzero value."""
    if t.zero_order != 0:
        raise PoleOrZero(repr(t))
    num = tuple((j, mu) for j, mu in t.factors if mu > 0)
    den = tuple((j, -mu) for j, mu in t.factors if mu < 0)
    n = _expand_cached(num)
    if t.sign < 0:
        n = -n
    return n.shift(t.exp), _expand_cached(den)


def binomial_product(den: Mapping[int, int] | Iterable[tuple[int, int]]) -> LaurentPoly:
    """Expansion of ``prod (1 - q**j)**m_j`` with all ``m_j >= 0``."""
    items = den.items() if isinstance(den, Mapping) else den
    key = tuple(sorted((j, m) for j, m in items if m))
    if any(m < 0 for _, m in key):
        raise NotPolynomial("negative multiplicity")
    return _expand_cached(key)


# ---------------------------------------------------------------------------
# rational functions with binomial denominators


class RatFunc:
    """``num / prod_j (1 - q**j)**den_j``; ``num`` may have any exact coefficients.

    Sums use the componentwise-max common denominator, so no polynomial
    division is ever needed.  Equality is by cross-multiplication.
    """

    __slots__ = ("num", "den")

    def __init__(self, num: LaurentPoly, den: Mapping[int, int] | None = None):
        self.num = num if isinstance(num, LaurentPoly) else LaurentPoly.constant(num)
        self.den = {j: m for j, m in (den or {}).items() if m}
        if any(m < 0 for m in self.den.values()):
            raise ValueError("denominator multiplicities must be nonnegative")

    @classmethod
    def from_qf(cls, t: QFactored, scalar=1) -> "RatFunc":
        if t.zero_order > 0:
            return cls(LaurentPoly())
        if t.zero_order < 0:
            raise PoleError(repr(t))
        num_f = tuple((j, mu) for j, mu in t.factors if mu > 0)
        den = {j: -mu for j, mu in t.factors if mu < 0}
        num = _expand_cached(num_f).shift(t.exp) * (scalar * t.sign)
        return cls(num, den)

    @classmethod
    def zero(cls) -> "RatFunc":
        return cls(LaurentPoly())

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def __add__(self, other: "RatFunc") -> "RatFunc":
        if not isinstance(other, RatFunc):
            other = RatFunc(other)
        if other.num.is_zero():
            return self
        if self.num.is_zero():
            return other
        lcm = dict(self.den)
        for j, m in other.den.items():
            if m > lcm.get(j, 0):
                lcm[j] = m
        a = self.num * binomial_product({j: m - self.den.get(j, 0) for j, m in lcm.items()})
        b = other.num * binomial_product({j: m - other.den.get(j, 0) for j, m in lcm.items()})
        return RatFunc(a + b, lcm)

    __radd__ = __add__

    def __neg__(self):
        return RatFunc(-self.num, self.den)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other) -> "RatFunc":
        if isinstance(other, QFactored):
            other = RatFunc.from_qf(other)
        if not isinstance(other, RatFunc):
            return RatFunc(self.num * other, self.den)
        den = dict(self.den)
        for j, m in other.den.items():
            den[j] = den.get(j, 0) + m
        return RatFunc(self.num * other.num, den)

    __rmul__ = __mul__

    def cross(self, other: "RatFunc") -> tuple[LaurentPoly, LaurentPoly]:
        return (self.num * binomial_product(other.den),
                other.num * binomial_product(self.den))

    def __eq__(self, other):
        if not isinstance(other, RatFunc):
            return NotImplemented
        a, b = self.cross(other)
        return a == b

    __hash__ = None

    def degree(self) -> int | None:
        """Degree as a rational function (numerator minus denominator degree)."""
        if self.num.is_zero():
            return None
        return self.num.degree() - sum(j * m for j, m in self.den.items())

    def __repr__(self):
        den = "".join(f"(1-q^{j})^{m}" for j, m in sorted(self.den.items()))
        return f"RatFunc(({self.num}) / {den or '1'})"
