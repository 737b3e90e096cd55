"""Legendre functions, real spherical harmonics and the exact polynomial model of H_l.

Measure convention: the sphere carries its normalized (mass one) surface
measure throughout, and so does every great circle.  With that choice the
reproducing kernel of H_l is ``(2l+1) * p_l(<x, y>)``.

Two models of H_l live here:

* the exact one (:func:`build_basis`), harmonic polynomials with rational
  coefficients.  Its basis is indexed by the "slice" monomials
  ``x^a y^b z^c`` with ``a in {0, 1}``: a harmonic polynomial is determined by
  the part of degree at most one in x, so its coefficients on those 2l+1
  monomials are its coordinates.
* the float one (:func:`real_sph_harm`), orthonormal real spherical harmonics
  with columns ordered m = -l, ..., l.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import mpmath
import numpy as np

from .errors import DomainError
from .exact import ExactMatrix
from .quat import SpherePoint


# ---------------------------------------------------------------- Legendre


def legendre(l: int, t):
    """p_l(t) by the three-term recurrence; works on scalars and arrays."""
    if l < 0:
        raise DomainError("degree must be non-negative")
    arr = np.asarray(t, dtype=float)
    if np.any(np.abs(arr) > 1 + 1e-12):
        raise DomainError("Legendre argument outside [-1, 1]")
    arr = np.clip(arr, -1.0, 1.0)
    p0 = np.ones_like(arr)
    if l == 0:
        out = p0
    else:
        p1 = arr.copy()
        for n in range(1, l):
            p0, p1 = p1, ((2 * n + 1) * arr * p1 - n * p0) / (n + 1)
        out = p1
    return float(out) if out.ndim == 0 else out


def wavelength(l: int) -> float:
    """W_l = 3 pi / (2l + 1)."""
    if l < 0:
        raise DomainError("degree must be non-negative")
    return 3 * math.pi / (2 * l + 1)


@dataclass(frozen=True)
class LegendreEvaluator:
    l: int

    def __call__(self, t):
        return legendre(self.l, t)

    @property
    def wavelength(self) -> float:
        return wavelength(self.l)


def assoc_legendre_table(l: int, t) -> np.ndarray:
    """Normalized associated Legendre values Pbar_l^m(t) for m = 0..l.

    Normalized so that the integral of Pbar^2 over [-1, 1] is 2, without the
    Condon-Shortley phase.  Returns shape (l+1,) + t.shape.
    """
    t = np.asarray(t, dtype=float)
    u = np.sqrt(np.clip(1.0 - t * t, 0.0, None))
    diag = np.empty((l + 1,) + t.shape)
    diag[0] = 1.0
    for m in range(1, l + 1):
        diag[m] = math.sqrt((2 * m + 1) / (2 * m)) * u * diag[m - 1]
    out = np.empty_like(diag)
    out[l] = diag[l]
    if l == 0:
        return out
    # pm1[m], pm2[m] hold Pbar_{n-1}^m and Pbar_{n-2}^m; order m joins at degree m
    ms = np.arange(l, dtype=float).reshape((-1,) + (1,) * t.ndim)
    pm1 = diag[:l].copy()
    pm2 = np.zeros_like(pm1)
    for n in range(1, l + 1):
        mm = ms[:n]
        a = np.sqrt((4.0 * n * n - 1) / (n * n - mm * mm))
        b = np.sqrt(np.abs(((n - 1) ** 2 - mm * mm) / (4.0 * (n - 1) ** 2 - 1)))
        new = a * (t * pm1[:n] - b * pm2[:n])
        pm2[:n] = pm1[:n]
        pm1[:n] = new
        if n < l:
            pm1[n] = diag[n]
            pm2[n] = 0.0
    out[:l] = pm1
    return out


def real_sph_harm(l: int, points) -> np.ndarray:
    """Orthonormal real spherical harmonics of degree l at unit vectors.

    ``points`` has shape (n, 3); the result has shape (n, 2l+1) with column
    l + m holding sqrt(2) Pbar cos(m phi) for m > 0, sqrt(2) Pbar sin(|m| phi)
    for m < 0 and Pbar for m = 0.
    """
    P = np.atleast_2d(np.asarray(points, dtype=float))
    t = np.clip(P[:, 2], -1.0, 1.0)
    phi = np.arctan2(P[:, 1], P[:, 0])
    table = assoc_legendre_table(l, t)
    out = np.empty((P.shape[0], 2 * l + 1))
    out[:, l] = table[0]
    for m in range(1, l + 1):
        out[:, l + m] = math.sqrt(2) * table[m] * np.cos(m * phi)
        out[:, l - m] = math.sqrt(2) * table[m] * np.sin(m * phi)
    return out


@lru_cache(maxsize=64)
def _quadrature(degree: int):
    nt = degree // 2 + 1
    nphi = degree + 1
    t, wt = np.polynomial.legendre.leggauss(nt)
    phi = 2 * np.pi * np.arange(nphi) / nphi
    T, PHI = np.meshgrid(t, phi, indexing="ij")
    s = np.sqrt(1 - T * T)
    pts = np.stack([s * np.cos(PHI), s * np.sin(PHI), T], axis=-1).reshape(-1, 3)
    w = np.repeat(wt / 2, nphi) / nphi
    pts.setflags(write=False)
    w.setflags(write=False)
    return pts, w


def sphere_quadrature(degree: int) -> tuple[np.ndarray, np.ndarray]:
    """Product Gauss rule exact for polynomials of total degree <= ``degree``.

    Weights sum to one (normalized measure).
    """
    return _quadrature(int(degree))


def projection_kernel(l: int, x: SpherePoint, y: SpherePoint) -> float:
    """Reproducing kernel (2l+1) p_l(<x, y>) of H_l, normalized measure."""
    c = float(np.dot(x.coords, y.coords))
    return (2 * l + 1) * legendre(l, max(-1.0, min(1.0, c)))


# ---------------------------------------------------------- equator values


# Y^m_l(0)^2 sqrt((1+l+|m|)(1+l-|m|)) / l over l <= 200, l - m even, spans
# [1.2796, 2.5981] on this artifact; frozen with a small margin
BOUNDY_INTERVAL = (1.25, 2.65)


@dataclass(frozen=True)
class UltrasphericalValue:
    l: int
    m: int
    value: float


def equator_value(l: int, m: int) -> UltrasphericalValue:
    """|Y^m_l(0)| from the binomial closed form (normalized measure)."""
    if abs(m) > l or l < 0:
        raise DomainError(f"need |m| <= l, got l={l}, m={m}")
    am = abs(m)
    if (l - am) % 2:
        return UltrasphericalValue(l, m, 0.0)
    c1 = math.comb(l + am, (l + am) // 2)
    c2 = math.comb(l - am, (l - am) // 2)
    logv = 0.5 * (math.log(2 * l + 1) + math.log(c1) + math.log(c2)) - l * math.log(2)
    return UltrasphericalValue(l, m, math.exp(logv))


# ------------------------------------------------------ exact polynomial model


@lru_cache(maxsize=None)
def monomials(l: int) -> tuple[tuple[int, int, int], ...]:
    """Degree-l exponent triples, x-degree ascending then y-degree descending.

    The first 2l+1 entries are the slice monomials (x-degree 0 or 1).
    """
    return tuple((a, b, l - a - b) for a in range(l + 1) for b in range(l - a, -1, -1))


def _dfact(n: int) -> int:
    # (n)!! with (-1)!! = 1
    r = 1
    while n > 1:
        r *= n
        n -= 2
    return r


def sphere_moment(a: int, b: int, c: int) -> Fraction:
    """Average of x^a y^b z^c over the sphere (normalized measure)."""
    if a % 2 or b % 2 or c % 2:
        return Fraction(0)
    return Fraction(_dfact(a - 1) * _dfact(b - 1) * _dfact(c - 1), _dfact(a + b + c + 1))


def _harmonic_from_slice(l: int, a0: int, b0: int) -> dict:
    """Harmonic polynomial whose only slice monomial is x^a0 y^b0 z^(l-a0-b0)."""
    poly = {}
    g = {(b0, l - a0 - b0): Fraction(1)}
    k = a0
    while g:
        for (b, c), v in g.items():
            poly[(k, b, c)] = v
        if k + 2 > l:
            break
        lap = {}
        for (b, c), v in g.items():
            if b >= 2:
                lap[(b - 2, c)] = lap.get((b - 2, c), 0) + v * b * (b - 1)
            if c >= 2:
                lap[(b, c - 2)] = lap.get((b, c - 2), 0) + v * c * (c - 1)
        scale = Fraction(-1, (k + 1) * (k + 2))
        g = {key: v * scale for key, v in lap.items() if v != 0}
        k += 2
    return poly


def laplacian(l: int, coeffs) -> dict:
    """Laplacian of sum coeffs[i] * monomials(l)[i], as {exponent: value}."""
    out = {}
    for (a, b, c), v in zip(monomials(l), coeffs):
        if v == 0:
            continue
        for i, e in enumerate((a, b, c)):
            if e >= 2:
                key = [a, b, c]
                key[i] -= 2
                key = tuple(key)
                out[key] = out.get(key, 0) + v * e * (e - 1)
    return {k: v for k, v in out.items() if v != 0}


@dataclass(frozen=True, eq=False)
class HarmonicBasis:
    """Exact basis of H_l as harmonic polynomials.

    ``coeffs`` has one row per basis polynomial over :func:`monomials`.
    Polynomial i has coefficient ``scales[i]`` on slice monomial i and zero
    on the other slice monomials, so coordinates are slice coefficients
    divided by the scales.
    """

    l: int
    coeffs: ExactMatrix
    gram: ExactMatrix
    ortho_transform: np.ndarray
    scales: tuple = ()
    _chol: object = field(repr=False, default=None)

    @property
    def dim(self) -> int:
        return 2 * self.l + 1

    @property
    def monomials(self):
        return monomials(self.l)

    def polynomials(self) -> list[list[Fraction]]:
        return self.coeffs.entries()

    def evaluate(self, coords, points) -> np.ndarray:
        """Float values at unit vectors of the polynomial with given coordinates."""
        P = np.atleast_2d(np.asarray(points, dtype=float))
        c = np.asarray(coords, dtype=float) @ self.coeffs.to_float()
        exps = np.array(self.monomials)
        vals = np.prod(P[:, None, :] ** exps[None, :, :], axis=2)
        return vals @ c

    def to_orthonormal(self, mat: ExactMatrix) -> np.ndarray:
        """Image T^{-1} A T of an operator matrix in the orthonormal frame."""
        L, dps = self._chol
        with mpmath.workdps(dps):
            A = mpmath.matrix(mat.num.tolist()) / mat.den
            B = L.T * A * mpmath.inverse(L.T)
            return np.array(B.tolist(), dtype=float)

    def orthonormality_residual(self) -> float:
        """max |T^t G T - I| with T the stored transform and G the exact Gram matrix.

        Evaluated at the working precision of the factorization, so it
        measures the float rounding of ``ortho_transform`` itself rather
        than the noise of a float matrix product.
        """
        _, dps = self._chol
        with mpmath.workdps(dps):
            G = mpmath.matrix(self.gram.num.tolist()) / self.gram.den
            T = mpmath.matrix(self.ortho_transform.tolist())
            E = T.T * G * T - mpmath.eye(self.dim)
            return float(max(abs(v) for v in E))


def _moment_matrix(l: int) -> tuple[np.ndarray, int]:
    mons = monomials(l)
    n = len(mons)
    M = np.zeros((n, n), dtype=object)
    for i, (a, b, c) in enumerate(mons):
        for j in range(i, n):
            a2, b2, c2 = mons[j]
            if (a + a2) % 2 or (b + b2) % 2:
                M[i, j] = M[j, i] = 0
                continue
            M[i, j] = M[j, i] = _dfact(a + a2 - 1) * _dfact(b + b2 - 1) * _dfact(c + c2 - 1)
    return M, _dfact(2 * l + 1)


@lru_cache(maxsize=None)
def build_basis(l: int) -> HarmonicBasis:
    """Exact harmonic basis of H_l with Gram matrix and orthonormalizing transform."""
    if l < 0:
        raise DomainError("degree must be non-negative")
    mons = monomials(l)
    index = {e: i for i, e in enumerate(mons)}
    rows = []
    for a0, b0, _ in mons[: 2 * l + 1]:
        poly = _harmonic_from_slice(l, a0, b0)
        row = [Fraction(0)] * len(mons)
        for e, v in poly.items():
            row[index[e]] = v
        rows.append(row)
    mom, mden = _moment_matrix(l)
    raw = ExactMatrix.from_fractions(rows)
    F = raw.num
    diag = [Fraction(int(F[i].dot(mom).dot(F[i])), raw.den ** 2 * mden) for i in range(len(rows))]
    # rescale each polynomial by a power of two near 1/norm; exact, and it
    # keeps the Gram matrix far better conditioned than the raw slice basis
    scales = [Fraction(2) ** round(-math.log2(float(g)) / 2) for g in diag]
    coeffs = ExactMatrix.from_fractions([[v * s for v in row] for row, s in zip(rows, scales)])
    F = coeffs.num
    gram = ExactMatrix(F.dot(mom).dot(F.T), coeffs.den ** 2 * mden).reduced()

    dps = 40 + 2 * l
    with mpmath.workdps(dps):
        G = mpmath.matrix(gram.num.tolist()) / gram.den
        L = mpmath.cholesky(G)
        T = mpmath.inverse(L.T)
        ortho = np.array(T.tolist(), dtype=float)
    return HarmonicBasis(l, coeffs, gram, ortho, tuple(scales), (L, dps))
