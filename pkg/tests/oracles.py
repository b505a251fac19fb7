"""Independent reference computations used as test oracles.

Nothing here imports the package: dense integer lists, direct Fraction
evaluation and floating-point roots of unity only.
"""
from __future__ import annotations

import cmath
import itertools
from fractions import Fraction
from math import comb


def pmul(a: list, b: list) -> list:
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] += x * y
    return out


def padd(a: list, b: list) -> list:
    n = max(len(a), len(b))
    return [(a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0) for i in range(n)]


def ptrim(a: list) -> list:
    a = list(a)
    while a and a[-1] == 0:
        a.pop()
    return a


def one_minus_qj(j: int) -> list:
    out = [0] * (j + 1)
    out[0] = 1
    out[j] -= 1
    return out


def prod_one_minus(js) -> list:
    out = [1]
    for j in js:
        out = pmul(out, one_minus_qj(j))
    return out


def gauss_binomial(n: int, k: int) -> list:
    """Coefficients of [n choose k]_q by the q-Pascal rule."""
    if k < 0 or k > n:
        return []
    if k == 0 or k == n:
        return [1]
    a = gauss_binomial(n - 1, k - 1)
    b = [0] * k + gauss_binomial(n - 1, k)
    return ptrim(padd(a, b))


def pentagonal(order: int) -> list:
    """(q;q)_inf up to q^order by the pentagonal number theorem."""
    out = [0] * (order + 1)
    for k in range(-order, order + 1):
        e = k * (3 * k - 1) // 2
        if 0 <= e <= order:
            out[e] += (-1) ** (k % 2)
    return out


def partitions(order: int) -> list:
    """p(0..order) by the direct coin-change count."""
    p = [1] + [0] * order
    for part in range(1, order + 1):
        for total in range(part, order + 1):
            p[total] += p[total - part]
    return p


def rpoch(a: Fraction, q: Fraction, k: int) -> Fraction | None:
    """(a;q)_k by its definition; None for an infinite value."""
    out = Fraction(1)
    if k >= 0:
        for j in range(k):
            out *= 1 - a * q**j
        return out
    for j in range(1, -k + 1):
        f = 1 - a / q**j
        if f == 0:
            return None
        out /= f
    return out


def inv_qfact(q: Fraction, m: int) -> Fraction:
    """1/(q;q)_m, which is 0 for m < 0."""
    v = rpoch(q, q, m)
    return Fraction(0) if v is None else 1 / v


def theorem_lhs_at(n: int, M1: int, M2: int, S: int, q: Fraction, box: int = 4) -> Fraction:
    """Left side of the summation theorem summed over a generous box."""
    total = Fraction(0)
    for k in itertools.product(range(-box, box + 1), repeat=n - 1):
        k = k + (S - sum(k),)
        t = Fraction((-1) ** (((n - 1) * S) % 2))
        t *= q ** (comb(n + 1, 2) * sum(x * x for x in k) + sum(i * x for i, x in enumerate(k, 1)))
        for i in range(n):
            for j in range(i + 1, n):
                t *= 1 - q ** (n * k[j] - n * k[i] + j - i)
        for i in range(1, n + 1):
            ki = k[i - 1]
            t *= rpoch(q, q, M1 + M2 + i - 1)
            t *= inv_qfact(q, M1 + n * ki + i - 1) * inv_qfact(q, M2 - n * ki + n - i)
        total += t
    return total


def theorem_rhs_at(n: int, M1: int, M2: int, S: int, q: Fraction) -> Fraction:
    return (q ** ((n + 1) * S * (S + 1) // 2) * rpoch(q, q, M1 + M2)
            * inv_qfact(q, M1 + S) * inv_qfact(q, M2 - S))


def conjecture_side_at(n: int, m: int, M1: int, M2: int, S: int, q: Fraction, box: int = 4) -> Fraction:
    total = Fraction(0)
    for k in itertools.product(range(-box, box + 1), repeat=n - 1):
        k = k + (S - sum(k),)
        twice = (n * (n + m) * sum(x * x for x in k) + 2 * m * sum(i * x for i, x in enumerate(k, 1))
                 - m * S * (S + 1) - n * S * (S + m))
        t = Fraction((-1) ** (((n - 1) * S) % 2)) * q ** (twice // 2)
        for i in range(n):
            for j in range(i + 1, n):
                t *= 1 - q ** (n * k[j] - n * k[i] + j - i)
        for i in range(1, n + 1):
            ki = k[i - 1]
            t *= rpoch(q, q, M1 + M2 + i - 1)
            t *= inv_qfact(q, M1 - S + n * ki + i - 1) * inv_qfact(q, M2 + S - n * ki + n - i)
        total += t
    return total


def root(n: int, r: int = 1) -> complex:
    return cmath.exp(2j * cmath.pi * r / n)


def eval_cyclo(coeffs, n: int) -> complex:
    """Numeric value of sum c_k w^k at w = exp(2 pi i / n)."""
    return sum(complex(float(c)) * root(n, k) for k, c in enumerate(coeffs))


def cyclotomic_numeric(n: int) -> list:
    """Phi_n from its primitive roots, rounded to integers."""
    poly = [complex(1)]
    for r in range(1, n + 1):
        if cmath.isclose(abs(complex(__import__("math").gcd(r, n))), 1):
            w = root(n, r)
            poly = [(poly[i - 1] if i > 0 else 0) - w * (poly[i] if i < len(poly) else 0)
                    for i in range(len(poly) + 1)]
    return [round(c.real) for c in poly]


def det_gauss(matrix) -> Fraction:
    """Determinant by Gaussian elimination over Fractions."""
    a = [[Fraction(x) for x in row] for row in matrix]
    n = len(a)
    det = Fraction(1)
    for col in range(n):
        piv = next((r for r in range(col, n) if a[r][col] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != col:
            a[col], a[piv] = a[piv], a[col]
            det = -det
        det *= a[col][col]
        for r in range(col + 1, n):
            f = a[r][col] / a[col][col]
            for c in range(col, n):
                a[r][c] -= f * a[col][c]
    return det


def watson_sides(a, b, c, d, e, N: int, q: Fraction) -> tuple[Fraction, Fraction]:
    """Classical terminating very-well-poised 8phi7 and its balanced 4phi3 image."""
    def p(*args):
        out = Fraction(1)
        for x in args:
            out *= rpoch(x, q, p.k)
        return out
    z = a * a * q ** (N + 2) / (b * c * d * e)
    left = Fraction(0)
    right = Fraction(0)
    for k in range(N + 1):
        p.k = k
        left += ((1 - a * q ** (2 * k)) / (1 - a) * p(a, b, c, d, e, q ** -N)
                 / p(q, a * q / b, a * q / c, a * q / d, a * q / e, a * q ** (N + 1)) * z ** k)
        right += (p(q ** -N, d, e, a * q / (b * c))
                  / p(q, a * q / b, a * q / c, d * e * q ** -N / a) * q ** k)
    p.k = N
    right *= p(a * q, a * q / (d * e)) / p(a * q / d, a * q / e)
    return left, right
