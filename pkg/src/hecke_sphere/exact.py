"""Exact rational matrices as integer numerators over one common denominator.

Products and sums stay in Python integers (numpy object arrays), so no gcd is
taken until :meth:`ExactMatrix.reduced` or :meth:`ExactMatrix.entries` asks
for it.
"""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np


class ExactMatrix:
    __slots__ = ("num", "den")

    def __init__(self, num, den: int = 1):
        num = np.asarray(num, dtype=object)
        if num.ndim != 2:
            raise ValueError("ExactMatrix needs a 2-D array")
        den = int(den)
        if den == 0:
            raise ZeroDivisionError("zero denominator")
        if den < 0:
            num, den = -num, -den
        self.num = num
        self.den = den

    @classmethod
    def from_fractions(cls, rows) -> "ExactMatrix":
        rows = [[Fraction(v) for v in r] for r in rows]
        den = math.lcm(*(v.denominator for r in rows for v in r)) if rows and rows[0] else 1
        num = np.array([[int(v * den) for v in r] for r in rows], dtype=object).reshape(len(rows), -1)
        return cls(num, den)

    @classmethod
    def identity(cls, n: int) -> "ExactMatrix":
        num = np.zeros((n, n), dtype=object)
        for i in range(n):
            num[i, i] = 1
        return cls(num, 1)

    @classmethod
    def zeros(cls, n: int, k: int | None = None) -> "ExactMatrix":
        num = np.zeros((n, n if k is None else k), dtype=object)
        num[...] = 0
        return cls(num, 1)

    @property
    def shape(self):
        return self.num.shape

    def reduced(self) -> "ExactMatrix":
        g = self.den
        for v in self.num.flat:
            g = math.gcd(g, int(v))
            if g == 1:
                return self
        return ExactMatrix(self.num // g, self.den // g)

    def entries(self) -> list[list[Fraction]]:
        return [[Fraction(int(v), self.den) for v in row] for row in self.num]

    def to_float(self) -> np.ndarray:
        r = self.reduced()
        return np.array([[int(v) / r.den for v in row] for row in r.num], dtype=float)

    @property
    def T(self) -> "ExactMatrix":
        return ExactMatrix(self.num.T.copy(), self.den)

    def is_zero(self) -> bool:
        return all(v == 0 for v in self.num.flat)

    def trace(self) -> Fraction:
        return Fraction(int(sum(self.num[i, i] for i in range(min(self.shape)))), self.den)

    def __matmul__(self, other: "ExactMatrix") -> "ExactMatrix":
        return ExactMatrix(self.num.dot(other.num), self.den * other.den)

    def __add__(self, other: "ExactMatrix") -> "ExactMatrix":
        if self.den == other.den:
            return ExactMatrix(self.num + other.num, self.den)
        g = math.gcd(self.den, other.den)
        a, b = other.den // g, self.den // g
        return ExactMatrix(self.num * a + other.num * b, self.den * a)

    def __neg__(self) -> "ExactMatrix":
        return ExactMatrix(-self.num, self.den)

    def __sub__(self, other: "ExactMatrix") -> "ExactMatrix":
        return self + (-other)

    def scale(self, c) -> "ExactMatrix":
        c = Fraction(c)
        return ExactMatrix(self.num * c.numerator, self.den * c.denominator)

    def __eq__(self, other) -> bool:
        if not isinstance(other, ExactMatrix) or self.shape != other.shape:
            return NotImplemented
        return bool(np.all(self.num * other.den == other.num * self.den))

    __hash__ = None

    def __repr__(self) -> str:
        return f"ExactMatrix(shape={self.shape}, den={self.den})"
