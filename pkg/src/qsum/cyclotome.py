"""Exact arithmetic in Q(w), w a primitive n-th root of unity, as Q[x]/Phi_n."""
from __future__ import annotations

from fractions import Fraction
from functools import lru_cache

from .report import VerificationReport, timed


class DivByZero(ZeroDivisionError):
    pass


def _trim(p: list) -> list:
    while p and not p[-1]:
        p.pop()
    return p


def _poly_divmod(num: list, den: list) -> tuple[list, list]:
    """Quotient and remainder of dense coefficient lists (low degree first)."""
    num = list(num)
    den = _trim(list(den))
    if not den:
        raise DivByZero("polynomial division by zero")
    lead = den[-1]
    dd = len(den) - 1
    if len(num) - 1 < dd:
        return [], _trim(num)
    quot = [0] * (len(num) - dd)
    for i in range(len(num) - 1, dd - 1, -1):
        c = num[i]
        if not c:
            continue
        c = Fraction(c, lead) if isinstance(c, int) and isinstance(lead, int) else c / lead
        if type(c) is Fraction and c.denominator == 1:
            c = c.numerator
        quot[i - dd] = c
        for k in range(dd + 1):
            num[i - dd + k] -= c * den[k]
    return _trim(quot), _trim(num[:dd])


@lru_cache(maxsize=None)
def _cyclo_tuple(n: int) -> tuple:
    if n < 1:
        raise ValueError("n must be positive")
    num = [-1] + [0] * (n - 1) + [1]
    for d in range(1, n):
        if n % d == 0:
            num, rem = _poly_divmod(num, list(_cyclo_tuple(d)))
            assert not rem
    return tuple(num)


def cyclotomic_poly(n: int) -> list[int]:
    """Integer coefficients of Phi_n, constant term first."""
    return list(_cyclo_tuple(n))


class CycloContext:
    """Q(w) for a fixed n; ``w`` is the class of x modulo Phi_n."""

    _instances: dict = {}

    def __new__(cls, n: int):
        # one context per n keeps identity checks cheap and pickling simple
        ctx = cls._instances.get(n)
        if ctx is None:
            ctx = super().__new__(cls)
            ctx.n = n
            ctx.phi = cyclotomic_poly(n)
            ctx.degree = len(ctx.phi) - 1
            ctx._powers = None
            cls._instances[n] = ctx
        return ctx

    def __getnewargs__(self):
        return (self.n,)

    def __getstate__(self):
        return {}

    def __setstate__(self, state):
        pass

    def __repr__(self):
        return f"CycloContext({self.n})"

    def elem(self, coeffs) -> "CycloElem":
        return CycloElem(self, self._reduce(list(coeffs)))

    def _reduce(self, p: list) -> tuple:
        d = self.degree
        phi = self.phi
        p = list(p)
        for i in range(len(p) - 1, d - 1, -1):
            c = p[i]
            if c:
                base = i - d
                for k in range(d):
                    p[base + k] -= c * phi[k]
            p[i] = 0
        p = p[:d] + [0] * (d - len(p))
        return tuple(p)

    def one(self) -> "CycloElem":
        return self.elem([1])

    def zero(self) -> "CycloElem":
        return self.elem([0])

    def omega_pow(self, r: int) -> "CycloElem":
        if self._powers is None:
            self._powers = [self.elem([0] * k + [1]) for k in range(self.n)]
        return self._powers[r % self.n]

    def omega(self) -> "CycloElem":
        return self.omega_pow(1)


class CycloElem:
    """Immutable residue class of Q[x] modulo Phi_n."""

    __slots__ = ("ctx", "coeffs")

    def __init__(self, ctx: CycloContext, coeffs: tuple):
        self.ctx = ctx
        self.coeffs = coeffs

    def _lift(self, other) -> tuple | None:
        if isinstance(other, CycloElem):
            if other.ctx is not self.ctx:
                raise ValueError("elements from different cyclotomic fields")
            return other.coeffs
        if isinstance(other, (int, Fraction)):
            return (other,) + (0,) * (self.ctx.degree - 1)
        return None

    def __add__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return CycloElem(self.ctx, tuple(a + b for a, b in zip(self.coeffs, o)))

    __radd__ = __add__

    def __neg__(self):
        return CycloElem(self.ctx, tuple(-a for a in self.coeffs))

    def __sub__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return CycloElem(self.ctx, tuple(a - b for a, b in zip(self.coeffs, o)))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            if not other:
                return CycloElem(self.ctx, (0,) * self.ctx.degree)
            return CycloElem(self.ctx, tuple(a * other for a in self.coeffs))
        if not isinstance(other, CycloElem):
            return NotImplemented
        if other.ctx is not self.ctx:
            raise ValueError("elements from different cyclotomic fields")
        a, b = self.coeffs, other.coeffs
        d = self.ctx.degree
        if d == 1:
            return CycloElem(self.ctx, (a[0] * b[0],))
        prod = [0] * (2 * d - 1)
        for i, x in enumerate(a):
            if x:
                for j, y in enumerate(b):
                    if y:
                        prod[i + j] += x * y
        return CycloElem(self.ctx, self.ctx._reduce(prod))

    __rmul__ = __mul__

    def inverse(self) -> "CycloElem":
        """Inverse via the extended Euclidean algorithm against Phi_n."""
        if not self:
            raise DivByZero("inverse of zero in cyclotomic field")
        # invariant: s * a == r (mod phi)
        r0, r1 = list(self.ctx.phi), _trim(list(self.coeffs))
        s0, s1 = [], [1]
        while len(r1) > 1:
            quot, rem = _poly_divmod(r0, r1)
            r0, r1 = r1, rem
            s0, s1 = s1, _sub(s0, _mul(quot, s1))
            if not r1:
                raise DivByZero("element not invertible")  # cannot happen for a field
        c = r1[0]
        return self.ctx.elem([Fraction(x) / c for x in s1])

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            if not other:
                raise DivByZero("division by zero")
            return CycloElem(self.ctx, tuple(Fraction(a) / other for a in self.coeffs))
        return self * other.inverse()

    def __rtruediv__(self, other):
        return self.inverse() * other

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        result = self.ctx.one()
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __bool__(self):
        return any(self.coeffs)

    def __eq__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return all(a == b for a, b in zip(self.coeffs, o))

    def __hash__(self):
        if self.is_rational():
            return hash(self.coeffs[0])
        return hash((self.ctx.n, self.coeffs))

    def is_rational(self) -> bool:
        return not any(self.coeffs[1:])

    def to_rational(self) -> Fraction:
        if not self.is_rational():
            raise ValueError(f"{self} is not rational")
        return Fraction(self.coeffs[0])

    def __repr__(self):
        return f"CycloElem({self.ctx.n}, {self})"

    def __str__(self):
        terms = []
        for k, c in enumerate(self.coeffs):
            if not c:
                continue
            if k == 0:
                terms.append(str(c))
            else:
                mono = "w" if k == 1 else f"w^{k}"
                terms.append(mono if c == 1 else f"-{mono}" if c == -1 else f"{c}*{mono}")
        return "(" + (" + ".join(terms) if terms else "0") + ")"


def _mul(a: list, b: list) -> list:
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] += x * y
    return _trim(out)


def _sub(a: list, b: list) -> list:
    n = max(len(a), len(b))
    return _trim([(a[i] if i < len(a) else 0) - (b[i] if i < len(b) else 0) for i in range(n)])


def cy_arith(a: CycloElem, b: CycloElem | None, op: str) -> CycloElem:
    if op == "add":
        return a + b
    if op == "mul":
        return a * b
    if op == "inv":
        return a.inverse()
    raise ValueError(f"unknown op {op!r}")


def omega_pow(ctx: CycloContext, r: int) -> CycloElem:
    return ctx.omega_pow(r)


def cy_is_rational(x) -> bool:
    if isinstance(x, CycloElem):
        return x.is_rational()
    return isinstance(x, (int, Fraction))


def verify_cyclo_products(n: int) -> VerificationReport:
    """Check prod_{i<n}(1 - w^i) = n and prod_{i<j<n}(w^i - w^j)(w^-i - w^-j) = n^(n-2)."""
    if n < 2:
        raise ValueError("n must be at least 2")
    with timed() as clock:
        ctx = CycloContext(n)
        w = ctx.omega_pow
        first = ctx.one()
        for i in range(1, n):
            first = first * (1 - w(i))
        second = ctx.one()
        for i in range(1, n):
            for j in range(i + 1, n):
                second = second * (w(i) - w(j)) * (w(-i) - w(-j))
        ok = first == n and second == n ** (n - 2)
    witness = None if ok else f"prod(1-w^i) = {first}; double product = {second}"
    return VerificationReport("cyclo", f"n={n}", "pass" if ok else "fail", witness, clock.ms)
