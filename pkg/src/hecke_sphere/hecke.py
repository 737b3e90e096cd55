"""Hecke operators T_m on H_l, the unit-invariant subspace and its Hecke eigenbasis.

[T_m f](x) = sum over g in O(m) of f(g.x).  Writing O(m) as a disjoint union
of left unit cosets O^x r gives T_m f = sum_r (T_1 f) o R_r, so only sigma(m)
rotations are needed once T_1 (the unit sum) is known.

Exact route: :func:`hecke_matrix` works in the exact harmonic-polynomial
basis of :mod:`harmonics`.  Substituting a rotation into a monomial and
reading off its slice coefficients (terms of degree <= 1 in x) only needs
products of binary forms in (y, z), done in integers with M = m R.

Float route: :func:`hecke_operator` works in the orthonormal real spherical
harmonic basis with an exact quadrature rule, and feeds the eigenbasis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property, lru_cache

import numpy as np

from .errors import DegeneracyError, InvariantFailure, ParameterError
from .exact import ExactMatrix
from .harmonics import build_basis, monomials, real_sph_harm, sphere_quadrature
from .quat import (
    _check_odd,
    coset_representatives,
    enumerate_norm,
    rotation_of,
    unit_group,
)

UNIT_COUNT = 24


# ------------------------------------------------------------------ exact


def _conv(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Row-wise product of binary forms given as coefficient rows."""
    if p.shape[1] < q.shape[1]:
        p, q = q, p
    out = np.zeros((p.shape[0], p.shape[1] + q.shape[1] - 1), dtype=object)
    out[...] = 0
    w = p.shape[1]
    for j in range(q.shape[1]):
        out[:, j:j + w] += q[:, j:j + 1] * p
    return out


def _slice_images(l: int, mats: list) -> np.ndarray:
    """Sum over integer matrices M of slice coefficients of x^a -> (M x)^a.

    Returns an object array of shape (2l+1, #monomials); column alpha holds
    the slice coefficients of prod_i (M_i . x)^alpha_i.
    """
    mons = monomials(l)
    K = np.zeros((2 * l + 1, len(mons)), dtype=object)
    K[...] = 0
    chunk = 48
    for start in range(0, len(mats), chunk):
        Ms = np.array(mats[start:start + chunk], dtype=object)
        nr = Ms.shape[0]
        lin = [Ms[:, i, 1:3] for i in range(3)]      # A_i = M_i1 y + M_i2 z
        B = [Ms[:, i, 0:1] for i in range(3)]        # coefficient of x
        one = np.ones((nr, 1), dtype=object)
        level = {(0, 0, 0): one}
        prev = None
        for d in range(1, l + 1):
            nxt = {}
            for a in range(d + 1):
                for b in range(d - a + 1):
                    c = d - a - b
                    if c:
                        nxt[(a, b, c)] = _conv(level[(a, b, c - 1)], lin[2])
                    elif b:
                        nxt[(a, b, c)] = _conv(level[(a, b - 1, c)], lin[1])
                    else:
                        nxt[(a, b, c)] = _conv(level[(a - 1, b, c)], lin[0])
            prev, level = level, nxt
        for j, (a, b, c) in enumerate(mons):
            K[: l + 1, j] += level[(a, b, c)].sum(axis=0)
            if l == 0:
                continue
            s1 = None
            for i, e in enumerate((a, b, c)):
                if e == 0:
                    continue
                key = [a, b, c]
                key[i] -= 1
                term = prev[tuple(key)] * (B[i] * e)
                s1 = term if s1 is None else s1 + term
            K[l + 1:, j] += s1.sum(axis=0)
    return K


@lru_cache(maxsize=None)
def _unit_monomial_sum(l: int) -> np.ndarray:
    """Integer matrix of T_1 acting on degree-l monomial coefficients."""
    mons = monomials(l)
    index = {e: i for i, e in enumerate(mons)}
    P = np.zeros((len(mons), len(mons)), dtype=object)
    P[...] = 0
    for u in unit_group():
        S = rotation_of(u).numerators
        perm = [next(k for k in range(3) if S[i][k]) for i in range(3)]
        sign = [S[i][perm[i]] for i in range(3)]
        for j, alpha in enumerate(mons):
            beta = [0, 0, 0]
            s = 1
            for i in range(3):
                beta[perm[i]] += alpha[i]
                if alpha[i] % 2 and sign[i] < 0:
                    s = -s
            P[index[tuple(beta)], j] += s
    return P


@lru_cache(maxsize=None)
def _basis_columns(l: int):
    """(P1 F^T, row scaling) pieces shared by every T_m at degree l."""
    basis = build_basis(l)
    F = basis.coeffs
    PF = _unit_monomial_sum(l).dot(F.num.T)
    # coordinate i = slice coefficient i / scales[i]; scales are powers of two
    inv = [1 / s for s in basis.scales]
    den = math.lcm(*(x.denominator for x in inv))
    rowmul = np.array([int(x * den) for x in inv], dtype=object).reshape(-1, 1)
    return PF, F.num.T, rowmul, den * F.den


@dataclass(frozen=True, eq=False)
class HeckeMatrix:
    """T_m on H_l: exact in the polynomial basis, symmetric float image in an orthonormal one."""

    l: int
    m: int
    exact: ExactMatrix

    @cached_property
    def ortho(self) -> np.ndarray:
        A = build_basis(self.l).to_orthonormal(self.exact)
        return (A + A.T) / 2

    @cached_property
    def ortho_asymmetry(self) -> float:
        A = build_basis(self.l).to_orthonormal(self.exact)
        return float(np.abs(A - A.T).max())

    def is_self_adjoint(self) -> bool:
        G = build_basis(self.l).gram
        return G @ self.exact == self.exact.T @ G

    def trace(self):
        return self.exact.trace()


@lru_cache(maxsize=None)
def _hecke_exact(l: int, m: int, method: str) -> ExactMatrix:
    PF, FT, rowmul, den = _basis_columns(l)
    if method == "cosets":
        mats = [rotation_of(g).numerators for g in coset_representatives(m)]
        K = _slice_images(l, mats)
        num = K.dot(PF)
    elif method == "full":
        mats = [rotation_of(g).numerators for g in enumerate_norm(m)]
        num = _slice_images(l, mats).dot(FT)
    else:
        raise ParameterError(f"unknown method {method!r}")
    return ExactMatrix(num * rowmul, den * m ** l).reduced()


def hecke_matrix(l: int, m: int, method: str = "cosets") -> HeckeMatrix:
    """Exact matrix of T_m on H_l.

    ``method="full"`` sums over all of O(m) instead of using the coset
    decomposition; it exists as an independent cross-check.
    """
    _check_odd(m)
    if l < 0:
        raise ParameterError("degree must be non-negative")
    return HeckeMatrix(l, m, _hecke_exact(int(l), int(m), method))


@dataclass(frozen=True)
class RecursionResult:
    l: int
    m: int
    n: int
    holds: bool
    commutes: bool
    residual: ExactMatrix
    commutator: ExactMatrix


def recursion_check(l: int, m: int, n: int) -> RecursionResult:
    """Check T_m T_n = 24 sum_{d | (m, n)} d T_{mn/d^2} and [T_m, T_n] = 0 exactly."""
    _check_odd(m)
    _check_odd(n)
    A = hecke_matrix(l, m).exact
    B = hecke_matrix(l, n).exact
    lhs = A @ B
    g = math.gcd(m, n)
    rhs = None
    for d in range(1, g + 1):
        if g % d:
            continue
        term = hecke_matrix(l, m * n // (d * d)).exact.scale(UNIT_COUNT * d)
        rhs = term if rhs is None else rhs + term
    residual = (lhs - rhs).reduced()
    commutator = (lhs - B @ A).reduced()
    return RecursionResult(l, m, n, residual.is_zero(), commutator.is_zero(), residual, commutator)


# ------------------------------------------------------ invariant dimension


def character_dimension(l: int) -> int:
    """dim H_l^{O^x} from the character of the 12 unit rotations.

    A rotation by angle t has character sum_{|k| <= l} e^{ikt} on H_l.
    """
    total = 0.0
    for R in {rotation_of(u) for u in unit_group()}:
        tr = sum(R.numerators[i][i] for i in range(3))
        theta = math.acos(max(-1.0, min(1.0, (tr - 1) / 2)))
        total += 1 + 2 * sum(math.cos(k * theta) for k in range(1, l + 1))
    dim = total / 12
    if abs(dim - round(dim)) > 1e-6:
        raise InvariantFailure(f"non-integral character average {dim}")
    return int(round(dim))


@lru_cache(maxsize=None)
def _invariant_polys(l: int) -> int:
    """dim of unit-invariant homogeneous polynomials of degree l, by orbit counting.

    The 12 rotations are signed permutations, so they permute monomials up
    to sign.  An orbit contributes one invariant exactly when no element of
    the stabilizer of a monomial maps it to its negative.
    """
    if l < 0:
        return 0
    rots = list({rotation_of(u).numerators for u in unit_group()})
    seen = set()
    count = 0
    for alpha in monomials(l):
        if alpha in seen:
            continue
        orbit_ok = True
        for S in rots:
            beta = [0, 0, 0]
            sign = 1
            for i in range(3):
                k = next(k for k in range(3) if S[i][k])
                beta[k] += alpha[i]
                if alpha[i] % 2 and S[i][k] < 0:
                    sign = -sign
            beta = tuple(beta)
            seen.add(beta)
            if beta == alpha and sign < 0:
                orbit_ok = False
        count += orbit_ok
    return count


def invariant_dimension(l: int) -> int:
    """Exact dim H_l^{O^x} = dim P_l^G - dim P_{l-2}^G (orbit counting)."""
    return _invariant_polys(l) - _invariant_polys(l - 2)


def projector_rank(l: int) -> int:
    """Exact rank of the averaging projector T_1/24 on H_l (rational elimination)."""
    from sympy import QQ
    from sympy.polys.matrices import DomainMatrix

    A = hecke_matrix(l, 1).exact.reduced()
    rows = [[QQ(int(v)) for v in row] for row in A.num]
    return DomainMatrix(rows, A.shape, QQ).rank()


# ------------------------------------------------------------ float route


@lru_cache(maxsize=None)
def _rot_float(m: int) -> tuple:
    return tuple(rotation_of(g).as_float() for g in coset_representatives(m))


@lru_cache(maxsize=8)
def _quad_basis(l: int):
    X, w = sphere_quadrature(2 * l)
    Y = real_sph_harm(l, X)
    return X, Y * w[:, None]


def rotation_matrix(l: int, R: np.ndarray) -> np.ndarray:
    """Matrix of f -> f o R on H_l in the real spherical harmonic basis."""
    X, YW = _quad_basis(l)
    return YW.T @ real_sph_harm(l, X @ R.T)


def _coset_sum(l: int, m: int) -> np.ndarray:
    return sum(rotation_matrix(l, R) for R in _rot_float(m))


_float_cache: dict = {}


def hecke_operator(l: int, m: int) -> np.ndarray:
    """Float symmetric matrix of T_m on H_l in the real spherical harmonic basis."""
    _check_odd(m)
    key = (int(l), int(m))
    if key not in _float_cache:
        if m == 1:
            # g and -g rotate alike: twice the sum over the 12 unit rotations
            rots = {rotation_of(u) for u in unit_group()}
            A = 2 * sum(rotation_matrix(l, R.as_float()) for R in sorted(rots, key=lambda r: r.numerators))
        else:
            A = _coset_sum(l, m) @ hecke_operator(l, 1)
        _float_cache[key] = (A + A.T) / 2
    return _float_cache[key]


@dataclass(frozen=True, eq=False)
class InvariantSubspace:
    l: int
    dimension: int
    basis: np.ndarray     # (2l+1, dimension), orthonormal columns


@lru_cache(maxsize=None)
def invariant_subspace(l: int) -> InvariantSubspace:
    """Orthonormal basis of H_l^{O^x} (real spherical harmonic coordinates)."""
    dim = invariant_dimension(l)
    P = hecke_operator(l, 1) / UNIT_COUNT
    w, V = np.linalg.eigh(P)
    keep = w > 0.5
    if int(keep.sum()) != dim:
        raise InvariantFailure(
            f"projector at l={l} has {int(keep.sum())} unit eigenvalues, expected {dim}")
    return InvariantSubspace(l, dim, V[:, keep])


@dataclass(frozen=True, eq=False)
class HeckeEigenfunction:
    """Unit vector in H_l^{O^x} (real spherical harmonic coordinates) with its Hecke eigenvalues."""

    l: int
    coeffs: np.ndarray
    eigenvalues: dict
    residuals: dict = field(default_factory=dict)

    @property
    def normalized(self) -> dict:
        """nu(p) = lambda(p) / (24 sqrt(p)) for every m > 1 in the table."""
        return {m: lam / (UNIT_COUNT * math.sqrt(m)) for m, lam in self.eigenvalues.items() if m > 1}

    def __call__(self, points) -> np.ndarray:
        return real_sph_harm(self.l, points) @ self.coeffs

    def with_eigenvalues(self, ms) -> "HeckeEigenfunction":
        ev = dict(self.eigenvalues)
        res = dict(self.residuals)
        for m in ms:
            if m not in ev:
                ev[m], res[m] = _rayleigh(self.l, m, self.coeffs)
        return HeckeEigenfunction(self.l, self.coeffs, ev, res)


def _rayleigh(l: int, m: int, v: np.ndarray) -> tuple[float, float]:
    Tv = hecke_operator(l, m) @ v
    lam = float(v @ Tv)
    return lam, float(np.linalg.norm(Tv - lam * v))


DEFAULT_PROBES = (3, 5, 7)
DEFAULT_EIGEN_MS = (1, 3, 5, 7, 11, 13, 15)


def _split(Q: np.ndarray, ops: list, scale: float, rng) -> list[np.ndarray]:
    """Recursively diagonalize commuting operators on span(Q)."""
    if Q.shape[1] == 1 or not ops:
        if Q.shape[1] > 1:
            raise DegeneracyError(f"eigenspace of dimension {Q.shape[1]} not split by probe set")
        return [Q[:, 0]]
    A = Q.T @ ops[0] @ Q
    w, V = np.linalg.eigh((A + A.T) / 2)
    out = []
    start = 0
    for i in range(1, len(w) + 1):
        if i == len(w) or w[i] - w[i - 1] > 1e-6 * scale:
            block = Q @ V[:, start:i]
            if i - start == 1:
                out.append(block[:, 0])
            else:
                out.extend(_split(block, ops[1:], scale, rng))
            start = i
    return out


@lru_cache(maxsize=None)
def _eigenbasis(l: int, probes: tuple, eigen_ms: tuple) -> tuple:
    sub = invariant_subspace(l)
    if sub.dimension == 0:
        return ()
    ops = [hecke_operator(l, p) for p in probes]
    scale = max(np.abs(op).max() for op in ops)
    rng = np.random.default_rng(0)
    try:
        vecs = _split(sub.basis, ops, scale, rng)
    except DegeneracyError:
        # fallback: a fixed random combination of the probes
        c = rng.uniform(0.5, 1.5, size=len(ops))
        mix = sum(ci * op for ci, op in zip(c, ops))
        vecs = _split(sub.basis, [mix], scale, rng)
    out = []
    for v in vecs:
        v = v / np.linalg.norm(v)
        k = int(np.argmax(np.abs(v)))
        if v[k] < 0:
            v = -v
        ev, res = {}, {}
        for m in sorted(set(eigen_ms) | set(probes)):
            ev[m], res[m] = _rayleigh(l, m, v)
        out.append(HeckeEigenfunction(l, v, ev, res))
    out.sort(key=lambda f: -f.eigenvalues[probes[0]])
    return tuple(out)


def eigenbasis(l: int, probe_set=DEFAULT_PROBES, eigen_ms=DEFAULT_EIGEN_MS) -> list[HeckeEigenfunction]:
    """Orthonormal Hecke eigenbasis B_l of H_l^{O^x}, ordered by decreasing lambda(p1)."""
    if l % 2 or l < 0:
        raise ParameterError(f"eigenbasis needs even l >= 0, got {l}")
    probes = tuple(int(p) for p in probe_set)
    if not probes:
        raise ParameterError("probe set must be nonempty")
    for p in probes:
        _check_odd(p)
    basis = list(_eigenbasis(int(l), probes, tuple(eigen_ms)))
    for f in basis:
        bad = {m: r for m, r in f.residuals.items() if r > 1e-8}
        if bad:
            raise InvariantFailure(f"eigen-residual above 1e-8 at l={l}: {bad}")
    return basis


def complete_basis(l: int) -> np.ndarray:
    """Orthonormal basis of all of H_l whose first columns are the eigenbasis B_l.

    The remaining columns span the orthogonal complement of H_l^{O^x}.
    """
    if l % 2:
        raise ParameterError("complete basis is built from the even-l eigenbasis")
    P = hecke_operator(l, 1) / UNIT_COUNT
    w, V = np.linalg.eigh(P)
    rest = V[:, w < 0.5]
    cols = [f.coeffs for f in eigenbasis(l)]
    head = np.array(cols).T if cols else np.zeros((2 * l + 1, 0))
    return np.hstack([head, rest])
