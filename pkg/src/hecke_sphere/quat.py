"""Hurwitz quaternions, the norm-m sets O(m) and their rotation action on S^2.

Elements of the Hurwitz order are stored with doubled coordinates so that all
arithmetic is integral: ``HurwitzQuaternion(a2, b2, c2, d2)`` stands for
``(a2 + b2 i + c2 j + d2 k) / 2`` with all four integers of equal parity.

A rotation coming from an element of norm m is kept as the integer matrix
``M = m * R``; every entry of R has denominator dividing m.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .errors import DomainError, ParameterError


def _hamilton(x: Sequence[int], y: Sequence[int]) -> tuple[int, int, int, int]:
    a1, b1, c1, d1 = x
    a2, b2, c2, d2 = y
    return (
        a1 * a2 - b1 * b2 - c1 * c2 - d1 * d2,
        a1 * b2 + b1 * a2 + c1 * d2 - d1 * c2,
        a1 * c2 - b1 * d2 + c1 * a2 + d1 * b2,
        a1 * d2 + b1 * c2 - c1 * b2 + d1 * a2,
    )


@dataclass(frozen=True, order=True)
class HurwitzQuaternion:
    """Element (a2 + b2 i + c2 j + d2 k)/2 of the Hurwitz order."""

    a2: int
    b2: int
    c2: int
    d2: int

    def __post_init__(self):
        parities = {v & 1 for v in self.doubled}
        if len(parities) != 1:
            raise DomainError(f"mixed parity doubled coordinates {self.doubled}")

    @classmethod
    def from_coords(cls, a, b, c, d) -> "HurwitzQuaternion":
        """Build from ordinary coordinates (integers or halves)."""
        vals = [Fraction(v) * 2 for v in (a, b, c, d)]
        if any(v.denominator != 1 for v in vals):
            raise DomainError("coordinates must be integers or half-integers")
        return cls(*(int(v) for v in vals))

    @property
    def doubled(self) -> tuple[int, int, int, int]:
        return (self.a2, self.b2, self.c2, self.d2)

    @property
    def coords(self) -> tuple[Fraction, ...]:
        return tuple(Fraction(v, 2) for v in self.doubled)

    @property
    def norm(self) -> int:
        return sum(v * v for v in self.doubled) // 4

    def conjugate(self) -> "HurwitzQuaternion":
        return HurwitzQuaternion(self.a2, -self.b2, -self.c2, -self.d2)

    def __neg__(self) -> "HurwitzQuaternion":
        return HurwitzQuaternion(-self.a2, -self.b2, -self.c2, -self.d2)

    def __mul__(self, other: "HurwitzQuaternion") -> "HurwitzQuaternion":
        p = _hamilton(self.doubled, other.doubled)
        # (x/2)(y/2) = p/4, so the doubled product is p/2; closure makes it exact
        return HurwitzQuaternion(*(v // 2 for v in p))

    def __str__(self) -> str:
        a, b, c, d = self.coords
        return f"{a} + {b}i + {c}j + {d}k"


@dataclass(frozen=True)
class RationalRotation:
    """Exact rotation R = numerators / source_norm."""

    numerators: tuple[tuple[int, int, int], ...]
    source_norm: int

    @property
    def entries(self) -> tuple[tuple[Fraction, ...], ...]:
        m = self.source_norm
        return tuple(tuple(Fraction(v, m) for v in row) for row in self.numerators)

    def int_matrix(self) -> np.ndarray:
        """m*R as an object array of Python ints."""
        return np.array(self.numerators, dtype=object)

    def as_float(self) -> np.ndarray:
        return np.array(self.numerators, dtype=float) / self.source_norm

    def is_orthogonal(self) -> bool:
        """Exact check of R^T R = I and det R = 1."""
        M = self.numerators
        m2 = self.source_norm ** 2
        for i in range(3):
            for j in range(3):
                s = sum(M[k][i] * M[k][j] for k in range(3))
                if s != (m2 if i == j else 0):
                    return False
        det = (M[0][0] * (M[1][1] * M[2][2] - M[1][2] * M[2][1])
               - M[0][1] * (M[1][0] * M[2][2] - M[1][2] * M[2][0])
               + M[0][2] * (M[1][0] * M[2][1] - M[1][1] * M[2][0]))
        return det == self.source_norm ** 3

    def __matmul__(self, other: "RationalRotation") -> "RationalRotation":
        A, B = self.numerators, other.numerators
        prod = tuple(tuple(sum(A[i][k] * B[k][j] for k in range(3)) for j in range(3))
                     for i in range(3))
        return RationalRotation(prod, self.source_norm * other.source_norm).reduced()

    def reduced(self) -> "RationalRotation":
        """Same rotation with the smallest common denominator."""
        g = self.source_norm
        for row in self.numerators:
            for v in row:
                g = math.gcd(g, v)
        if g == 1:
            return self
        return RationalRotation(tuple(tuple(v // g for v in row) for row in self.numerators),
                                self.source_norm // g)


@dataclass(frozen=True)
class SpherePoint:
    """Unit vector, optionally carrying an exact lattice direction.

    In exact mode ``lattice`` is a primitive integer triple (u, v, w) and the
    point is (u, v, w)/sqrt(h) with h = u^2 + v^2 + w^2, which is then the
    height of the point.
    """

    coords: tuple[float, float, float]
    lattice: tuple[int, int, int] | None = None

    def __post_init__(self):
        if abs(sum(c * c for c in self.coords) - 1.0) > 1e-12:
            raise DomainError(f"not a unit vector: {self.coords}")

    @classmethod
    def from_lattice(cls, u: int, v: int, w: int) -> "SpherePoint":
        u, v, w = int(u), int(v), int(w)
        g = math.gcd(math.gcd(u, v), w)
        if g == 0:
            raise DomainError("zero vector has no direction")
        u, v, w = u // g, v // g, w // g
        r = math.sqrt(u * u + v * v + w * w)
        return cls((u / r, v / r, w / r), (u, v, w))

    @classmethod
    def from_rational(cls, coords: Iterable) -> "SpherePoint":
        """Exact point from rationals with squared norm exactly 1."""
        fr = [Fraction(c) for c in coords]
        if sum(c * c for c in fr) != 1:
            raise DomainError("rational coordinates do not have norm 1")
        den = math.lcm(*(c.denominator for c in fr))
        return cls.from_lattice(*(int(c * den) for c in fr))

    @classmethod
    def from_float(cls, vec) -> "SpherePoint":
        v = np.asarray(vec, dtype=float)
        n = np.linalg.norm(v)
        if n == 0:
            raise DomainError("zero vector has no direction")
        v = v / n
        return cls(tuple(float(c) for c in v))

    @property
    def exact(self) -> bool:
        return self.lattice is not None

    @property
    def height(self) -> int | None:
        if self.lattice is None:
            return None
        return sum(c * c for c in self.lattice)

    def vector(self) -> np.ndarray:
        return np.array(self.coords)

    def __neg__(self) -> "SpherePoint":
        if self.exact:
            return SpherePoint.from_lattice(*(-c for c in self.lattice))
        return SpherePoint(tuple(-c for c in self.coords))


def divisor_sum(m: int) -> int:
    return sum(d for d in range(1, m + 1) if m % d == 0)


def _check_odd(m: int) -> None:
    if not isinstance(m, (int, np.integer)) or m < 1 or m % 2 == 0:
        raise ParameterError(f"Hecke index must be an odd positive integer, got {m!r}")


@lru_cache(maxsize=None)
def _enumerate(m: int) -> tuple[HurwitzQuaternion, ...]:
    target = 4 * m
    bound = math.isqrt(target)
    out = []
    for a in range(-bound, bound + 1):
        ra = target - a * a
        for b in range(-bound, bound + 1):
            if (b - a) & 1:
                continue
            rb = ra - b * b
            if rb < 0:
                continue
            for c in range(-bound, bound + 1):
                if (c - a) & 1:
                    continue
                rc = rb - c * c
                if rc < 0:
                    continue
                d = math.isqrt(rc)
                if d * d != rc or (d - a) & 1:
                    continue
                out.append((a, b, c, d))
                if d:
                    out.append((a, b, c, -d))
    out.sort()
    return tuple(HurwitzQuaternion(*q) for q in out)


def enumerate_norm(m: int) -> list[HurwitzQuaternion]:
    """All elements of O with norm m, in lexicographic order of doubled coordinates."""
    _check_odd(m)
    return list(_enumerate(int(m)))


def unit_group() -> list[HurwitzQuaternion]:
    return enumerate_norm(1)


def rotation_of(g: HurwitzQuaternion) -> RationalRotation:
    """Rotation x -> g x conj(g) / n(g) as an exact matrix."""
    n = g.norm
    if n == 0:
        raise DomainError("zero quaternion does not define a rotation")
    a, b, c, d = g.doubled
    # doubled coordinates give 4*n*R; parity makes every entry divisible by 4
    M4 = (
        (a*a + b*b - c*c - d*d, 2 * (b*c - a*d), 2 * (b*d + a*c)),
        (2 * (b*c + a*d), a*a - b*b + c*c - d*d, 2 * (c*d - a*b)),
        (2 * (b*d - a*c), 2 * (c*d + a*b), a*a - b*b - c*c + d*d),
    )
    return RationalRotation(tuple(tuple(v // 4 for v in row) for row in M4), n)


def act(g: HurwitzQuaternion, x: SpherePoint) -> SpherePoint:
    """The point g.x; exact whenever x is."""
    R = rotation_of(g)
    if x.exact:
        M = R.numerators
        u = [sum(M[i][k] * x.lattice[k] for k in range(3)) for i in range(3)]
        return SpherePoint.from_lattice(*u)
    return SpherePoint.from_float(R.as_float() @ x.vector())


@lru_cache(maxsize=None)
def _coset_reps(m: int) -> tuple[HurwitzQuaternion, ...]:
    units = _enumerate(1)
    reps = set()
    for g in _enumerate(m):
        reps.add(min(u * g for u in units))
    return tuple(sorted(reps))


def coset_representatives(m: int) -> list[HurwitzQuaternion]:
    """Canonical representatives of the left cosets O^x g partitioning O(m).

    Each representative is the lexicographic minimum of its coset; for odd m
    there are sigma(m) of them.
    """
    _check_odd(m)
    return list(_coset_reps(int(m)))
