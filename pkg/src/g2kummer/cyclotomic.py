"""Exact arithmetic in cyclotomic fields Q(zeta_n).

Elements are coefficient tuples in the power basis 1, z, ..., z^(d-1) with
d = phi(n), reduced modulo the n-th cyclotomic polynomial.
"""
from __future__ import annotations

from fractions import Fraction
from functools import lru_cache

import numpy as np


def _num(x):
    x = Fraction(x)
    return int(x) if x.denominator == 1 else x


def _polymul(p, q):
    out = [0] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        if a == 0:
            continue
        for j, b in enumerate(q):
            if b:
                out[i + j] += a * b
    return out


def _polydivmod_monic(p, m):
    p = list(p)
    dm = len(m) - 1
    while len(p) - 1 >= dm and len(p) > 0:
        c = p[-1]
        if c != 0:
            shift = len(p) - 1 - dm
            for i, mc in enumerate(m):
                p[shift + i] -= c * mc
        p.pop()
    return p


@lru_cache(maxsize=None)
def cyclotomic_polynomial(n: int) -> tuple[int, ...]:
    """Integer coefficients (low degree first) of Phi_n."""
    # x^n - 1 = prod_{d | n} Phi_d
    num = [Fraction(-1)] + [Fraction(0)] * (n - 1) + [Fraction(1)]
    for d in range(1, n):
        if n % d == 0:
            num = _exact_div(num, [Fraction(c) for c in cyclotomic_polynomial(d)])
    return tuple(int(c) for c in num)


def _exact_div(p, m):
    p = list(p)
    q = [Fraction(0)] * (len(p) - len(m) + 1)
    for k in range(len(q) - 1, -1, -1):
        c = p[k + len(m) - 1] / m[-1]
        q[k] = c
        for i, mc in enumerate(m):
            p[k + i] -= c * mc
    assert all(x == 0 for x in p), "inexact polynomial division"
    return q


class Cyclo:
    """Element of Q(zeta_n)."""

    __slots__ = ("n", "c")

    def __init__(self, n: int, coeffs):
        self.n = n
        m = cyclotomic_polynomial(n)
        d = len(m) - 1
        c = [x if isinstance(x, int) else _num(x) for x in coeffs]
        if len(c) > d:
            c = _polydivmod_monic(c, m)
        c = c + [0] * (d - len(c))
        self.c = tuple(c)

    @classmethod
    def root(cls, n: int, k: int = 1) -> "Cyclo":
        k %= n
        return cls(n, [0] * k + [1])

    @classmethod
    def const(cls, n: int, v) -> "Cyclo":
        return cls(n, [v])

    def _lift(self, other):
        if isinstance(other, Cyclo):
            if other.n != self.n:
                raise ValueError("mixing cyclotomic fields")
            return other
        return Cyclo(self.n, [other])

    def __add__(self, other):
        o = self._lift(other)
        return Cyclo(self.n, [a + b for a, b in zip(self.c, o.c)])

    __radd__ = __add__

    def __neg__(self):
        return Cyclo(self.n, [-a for a in self.c])

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        o = self._lift(other)
        return Cyclo(self.n, _polymul(self.c, o.c))

    __rmul__ = __mul__

    def conjugate(self) -> "Cyclo":
        # z -> z^(n-1)
        out = [0] * self.n
        for i, a in enumerate(self.c):
            out[(-i) % self.n] += a
        return Cyclo(self.n, out)

    def is_zero(self) -> bool:
        return all(a == 0 for a in self.c)

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)) or isinstance(other, Cyclo):
            return (self - other).is_zero()
        return NotImplemented

    def __hash__(self):
        return hash((self.n, self.c))

    def __complex__(self):
        z = np.exp(2j * np.pi / self.n)
        return complex(sum(float(a) * z ** i for i, a in enumerate(self.c)))

    def __repr__(self):
        return f"Cyclo({self.n}, {[str(a) for a in self.c]})"
