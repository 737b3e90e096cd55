"""Twisted pre-trace identity, kernel sums over O(m), annihilating amplifiers
and the sign-change experiments.

Normalization: functions are unit vectors for the unit-mass measure, so
with A(phi) = sum_n alpha(n) lambda_phi(n) / sqrt(n) the identity checked is

    1/(24 (2l+1)) sum_{phi in B_l} A(phi)^2 phi(x) phi(y)
        = sum_{n,m} alpha(n) alpha(m) sum_{d | (n,m)} d / sqrt(nm)
              sum_{g in O(nm/d^2)} p_l(<g.x, y>).

With the 4 pi mass measure the left prefactor reads 4 pi / (24 (2l+1));
the two agree because phi_unit = sqrt(4 pi) phi_4pi.  The left side uses
the float eigenbasis only; the right side uses quaternion enumeration and
the Legendre recurrence only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .diophantine import count_near, generate_S_l
from .errors import CoverageError, DomainError, InfeasibleError, ParameterError
from .geodesic import E3, restrict
from .harmonics import legendre, wavelength
from .hecke import UNIT_COUNT, eigenbasis
from .nodal import SphericalGrid, evaluate_on_grid
from .quat import SpherePoint, _check_odd, enumerate_norm, rotation_of

AMBIGUITY = 1e-9

# with x = (1,1,0)/sqrt(2) and the default partner, the m = 1 main-term bound
# fails at 57 even l in [40, 346] and holds for every even l in [348, 4000]
KEY_LEMMA_CROSSOVER = 348


def odd_primes(lo: float, hi: float) -> tuple[int, ...]:
    lo_i = max(3, math.ceil(lo))
    return tuple(p for p in range(lo_i, int(math.floor(hi)) + 1)
                 if p % 2 and all(p % d for d in range(3, math.isqrt(p) + 1, 2)))


@dataclass(frozen=True, eq=False)
class AmplifierVector:
    """alpha supported on odd primes (or any odd integers) with real coefficients."""

    support: tuple[int, ...]
    coeffs: np.ndarray

    def __post_init__(self):
        if len(self.support) != len(self.coeffs):
            raise ParameterError("support and coefficients differ in length")
        for n in self.support:
            _check_odd(n)

    @classmethod
    def uniform(cls, support) -> "AmplifierVector":
        support = tuple(support)
        if not support:
            return cls((), np.zeros(0))
        return cls(support, np.full(len(support), 1 / math.sqrt(len(support))))

    @classmethod
    def window(cls, P: float, K: float = 2.0) -> "AmplifierVector":
        """Uniform unit vector on the odd primes in [P^(1/K), P]."""
        return cls.uniform(odd_primes(P ** (1 / K), P))

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.coeffs))

    def items(self):
        return zip(self.support, self.coeffs.tolist())


# ------------------------------------------------------------ kernel sums


@dataclass(frozen=True)
class KernelSum:
    l: int
    m: int
    total: float
    main: float
    residual: float
    stabilizer: int      # N(x, m, 0)


def _legendre_sum(l: int, m: int, x: np.ndarray, y: np.ndarray) -> float:
    Rs = np.array([rotation_of(g).as_float() for g in enumerate_norm(m)])
    t = np.clip((Rs @ x) @ y, -1.0, 1.0)
    return float(np.sort(legendre(l, t)).sum())


def kernel_sum(x: SpherePoint, y: SpherePoint, m: int, l: int) -> KernelSum:
    """sum over g in O(m) of p_l(<g.x, y>), split as p_l(<x,y>) N(x,m,0) + residual.

    The residual is the sum over the g that move x off {x, -x}, so the
    split is a partition of the terms rather than an estimate.
    """
    _check_odd(m)
    if l % 2:
        raise ParameterError("kernel sums are taken for even l")
    rep = count_near(x, m, 0.0)
    xv, yv = x.vector(), y.vector()
    Rs = np.array([rotation_of(g).as_float() for g in enumerate_norm(m)])
    t = np.clip((Rs @ xv) @ yv, -1.0, 1.0)
    vals = legendre(l, t)
    fixed = {g for g in rep.witnesses}
    mask = np.array([g not in fixed for g in enumerate_norm(m)])
    main = float(legendre(l, float(np.clip(xv @ yv, -1, 1)))) * rep.count
    residual = float(vals[mask].sum())
    return KernelSum(l, m, float(vals.sum()), main, residual, rep.count)


# ------------------------------------------------------ spectral identity


@dataclass(frozen=True, eq=False)
class SpectralEvaluation:
    l: int
    x: SpherePoint
    y: SpherePoint
    alpha: AmplifierVector
    lhs: float
    rhs: float
    terms: dict = field(default_factory=dict)     # (n, m, d) -> contribution
    amplitudes: tuple = ()                        # A_alpha(phi) per basis element

    @property
    def discrepancy(self) -> float:
        return abs(self.lhs - self.rhs) / (1 + abs(self.lhs))


def amplitudes(alpha: AmplifierVector, basis) -> np.ndarray:
    """A_alpha(phi) = sum alpha(n) lambda_phi(n)/sqrt(n) for each phi."""
    missing = sorted({n for n in alpha.support for f in basis if n not in f.eigenvalues})
    if missing:
        raise CoverageError(f"eigenvalues missing for m in {missing}")
    return np.array([sum(a * f.eigenvalues[n] / math.sqrt(n) for n, a in alpha.items())
                     for f in basis])


def spectral_lhs(l: int, alpha: AmplifierVector, x: SpherePoint, y: SpherePoint, basis) -> tuple:
    A = amplitudes(alpha, basis)
    vx = np.array([float(f(x.vector()[None])[0]) for f in basis])
    vy = np.array([float(f(y.vector()[None])[0]) for f in basis])
    return float((A * A * vx * vy).sum() / (UNIT_COUNT * (2 * l + 1))), A


def spectral_rhs(l: int, alpha: AmplifierVector, x: SpherePoint, y: SpherePoint) -> tuple[float, dict]:
    xv, yv = x.vector(), y.vector()
    terms = {}
    cache: dict[int, float] = {}
    for n, an in alpha.items():
        for m, am in alpha.items():
            g = math.gcd(n, m)
            for d in (d for d in range(1, g + 1) if g % d == 0):
                k = n * m // (d * d)
                if k not in cache:
                    cache[k] = _legendre_sum(l, k, xv, yv)
                terms[(n, m, d)] = an * am * d / math.sqrt(n * m) * cache[k]
    # fixed summation order
    return float(math.fsum(terms[k] for k in sorted(terms))), terms


def spectral_identity(l: int, alpha: AmplifierVector, x: SpherePoint, y: SpherePoint,
                      basis=None) -> SpectralEvaluation:
    """Both sides of the twisted pre-trace identity by independent routes.

    Without ``basis`` the eigenbasis is computed and extended to cover the
    support of alpha; a supplied basis must already carry those eigenvalues.
    """
    if l % 2:
        raise ParameterError("spectral identity is evaluated for even l")
    if basis is None:
        basis = [f.with_eigenvalues(alpha.support) for f in eigenbasis(l)]
    lhs, A = spectral_lhs(l, alpha, x, y, basis)
    rhs, terms = spectral_rhs(l, alpha, x, y)
    return SpectralEvaluation(l, x, y, alpha, lhs, rhs, terms, tuple(A.tolist()))


# -------------------------------------------------------- annihilation


def annihilating_alpha(constraints, window) -> AmplifierVector:
    """Unit alpha on ``window`` orthogonal to every constraint eta-vector.

    The null space comes from a pivoted QR of the constraint matrix; among
    its unit vectors the one closest to the uniform vector is returned,
    so zero constraints give the uniform amplifier.
    """
    window = tuple(window)
    C = np.array([np.asarray(c, dtype=float) for c in constraints]).reshape(-1, len(window))
    n, k = len(window), C.shape[0]
    if n == 0 or n <= k:
        raise InfeasibleError(
            f"window has {n} primes but {k} constraints; need at least {k + 1} primes")
    if k == 0:
        return AmplifierVector.uniform(window)
    Q, R, _ = scipy.linalg.qr(C.T, pivoting=True)
    diag = np.abs(np.diag(R))
    rank = int((diag > 1e-12 * max(diag.max(), 1.0)).sum())
    N = Q[:, rank:]
    u = np.full(n, 1 / math.sqrt(n))
    a = N @ (N.T @ u)
    if np.linalg.norm(a) < 1e-8:
        a = N[:, 0]
    a = a / np.linalg.norm(a)
    if a[np.argmax(np.abs(a))] < 0:
        a = -a
    return AmplifierVector(window, a)


def eta_vectors(basis, window) -> np.ndarray:
    return np.array([[f.eigenvalues[p] / math.sqrt(p) for p in window] for f in basis])


# ---------------------------------------------------------- sign changes


def wavelength_partner(x: SpherePoint, l: int) -> SpherePoint:
    """Point at distance W_l from x, turning counterclockwise about the z-axis.

    For x on the equator z = 0 this is the partner z(x) used by the sample
    sets; at the poles the turn is towards i.
    """
    v = x.vector()
    t = np.cross([0.0, 0.0, 1.0], v)
    if np.linalg.norm(t) < 1e-12:
        t = np.array([1.0, 0.0, 0.0])
    t /= np.linalg.norm(t)
    W = wavelength(l)
    return SpherePoint.from_float(math.cos(W) * v + math.sin(W) * t)


@dataclass(frozen=True)
class Census:
    l: int
    x: SpherePoint
    y: SpherePoint
    sign_changing: tuple[int, ...]
    non_negative: tuple[int, ...]
    ambiguous: tuple[int, ...]
    values: tuple          # (phi(x), phi(y)) per basis element

    @property
    def count(self) -> int:
        return len(self.sign_changing)


def sup_norm_estimate(f) -> float:
    return float(np.abs(evaluate_on_grid(f.l, f.coeffs, SphericalGrid.for_degree(f.l, 4))).max())


def classify_pair(basis, x: SpherePoint, y: SpherePoint):
    """Indices of basis elements with phi(x) phi(y) < 0, >= 0, and ambiguous."""
    sc, nn, amb, vals = [], [], [], []
    for i, f in enumerate(basis):
        fx = float(f(x.vector()[None])[0])
        fy = float(f(y.vector()[None])[0])
        vals.append((fx, fy))
        tol = AMBIGUITY * sup_norm_estimate(f)
        if abs(fx) < tol or abs(fy) < tol:
            amb.append(i)
        elif fx * fy < 0:
            sc.append(i)
        else:
            nn.append(i)
    return sc, nn, amb, vals


def sign_change_census(l: int, x: SpherePoint, y: SpherePoint | None = None, basis=None) -> Census:
    """Split B_l by the sign of phi(x) phi(y); values below 1e-9 ||phi||_inf are ambiguous."""
    if l % 2:
        raise ParameterError("census needs even l")
    if not x.exact:
        raise DomainError("census needs a rational point x (its height is checked)")
    if x.height > l ** 1.5:
        raise DomainError(f"height {x.height} exceeds l^(3/2) = {l ** 1.5:.1f}")
    y = wavelength_partner(x, l) if y is None else y
    d = math.acos(max(-1.0, min(1.0, float(x.vector() @ y.vector()))))
    if abs(d - wavelength(l)) > 1e-12:
        raise DomainError(f"d(x, y) = {d:.15f} is not W_l = {wavelength(l):.15f}")
    basis = eigenbasis(l) if basis is None else basis
    sc, nn, amb, vals = classify_pair(basis, x, y)
    return Census(l, x, y, tuple(sc), tuple(nn), tuple(amb), tuple(vals))


@dataclass(frozen=True, eq=False)
class AnnihilationRun:
    census: Census
    alpha: AmplifierVector
    max_constrained_amplitude: float
    full: SpectralEvaluation
    restricted_lhs: float      # lhs summed over the sign-changing phi only


def annihilation_run(l: int, x: SpherePoint, window=None) -> AnnihilationRun:
    """Annihilate every phi that does not change sign between x and z(x).

    The lhs of the spectral identity then only sees sign-changing phi,
    which is checked by recomputing it on that subset.
    """
    window = odd_primes(3, 13) if window is None else tuple(window)
    basis = [f.with_eigenvalues(window) for f in eigenbasis(l)]
    cen = sign_change_census(l, x, basis=basis)
    keep = sorted(cen.non_negative + cen.ambiguous)
    alpha = annihilating_alpha(eta_vectors([basis[i] for i in keep], window), window)
    ev = spectral_identity(l, alpha, x, cen.y, basis)
    A = np.asarray(ev.amplitudes)
    worst = float(np.abs(A[keep]).max()) if keep else 0.0
    sub = [basis[i] for i in cen.sign_changing]
    restricted = spectral_lhs(l, alpha, x, cen.y, sub)[0] if sub else 0.0
    return AnnihilationRun(cen, alpha, worst, ev, restricted)


# ------------------------------------------------------------ Key Lemma


@dataclass(frozen=True)
class KeyLemmaReport:
    l: int
    main_term: float
    C: float
    threshold: float           # -3C/2 + 0.2
    holds: bool
    full_rhs: float
    support: tuple


def key_lemma_check(l: int, x: SpherePoint | None = None) -> KeyLemmaReport:
    """m = 1 main term against -3C/2 + 0.2, C = |p_l(cos W_l)| N(x,1,0) / 2.

    alpha is uniform on the odd primes in [3, l^(1/4)], widened to {3}
    when that window is empty; the sign of the full right side is
    reported alongside.
    """
    if l % 2:
        raise ParameterError("Key Lemma check needs even l")
    x = SpherePoint.from_lattice(1, 1, 0) if x is None else x
    y = wavelength_partner(x, l)
    ks = kernel_sum(x, y, 1, l)
    C = abs(legendre(l, math.cos(wavelength(l)))) * ks.stabilizer / 2
    support = odd_primes(3, l ** 0.25) or (3,)
    alpha = AmplifierVector.uniform(support)
    # ||alpha|| = 1, so the main term is the unit sum itself
    main = float(np.sum(alpha.coeffs ** 2)) * ks.total
    thr = -1.5 * C + 0.2
    rhs = spectral_rhs(l, alpha, x, y)[0]
    return KeyLemmaReport(l, main, C, thr, main <= thr, rhs, support)


@dataclass(frozen=True)
class KeyLemmaScan:
    l_values: tuple
    failing: tuple
    crossover: int | None      # smallest L with the bound holding on every scanned l >= L


def key_lemma_scan(l_values, x: SpherePoint | None = None) -> KeyLemmaScan:
    """Evaluate the m = 1 main-term bound over many even l (unit sums only)."""
    ls = tuple(int(l) for l in l_values)
    if any(l % 2 for l in ls):
        raise ParameterError("Key Lemma scan needs even l")
    x = SpherePoint.from_lattice(1, 1, 0) if x is None else x
    N = count_near(x, 1, 0.0).count
    Rs = np.array([rotation_of(g).as_float() for g in enumerate_norm(1)])
    xv = x.vector()
    failing = []
    for l in ls:
        y = wavelength_partner(x, l).vector()
        main = float(legendre(l, np.clip((Rs @ xv) @ y, -1.0, 1.0)).sum())
        C = abs(legendre(l, math.cos(wavelength(l)))) * N / 2
        if main > -1.5 * C + 0.2:
            failing.append(l)
    later = [l for l in ls if not failing or l > max(failing)]
    return KeyLemmaScan(ls, tuple(failing), min(later) if later else None)


# ------------------------------------------------------ total zeros


@dataclass(frozen=True)
class TotalZeroRow:
    l: int
    basis_size: int
    total: int
    min_count: int
    interval_hits: int
    hits_certified: bool


@dataclass(frozen=True)
class TotalZeroTable:
    rows: tuple[TotalZeroRow, ...]
    slope: float
    kappa: float


def total_zero_experiment(l_list, kappa: float = 0.05, circle=E3) -> TotalZeroTable:
    """Total certified zeros of B_l on an equator and the log-log growth slope.

    For every S_l interval [x, z(x)] (on the equator z = 0) where a basis
    function changes sign, a certified zero inside the interval is
    required; ``hits_certified`` records whether each was found.
    """
    ls = [int(l) for l in l_list]
    if any(l % 2 for l in ls) or ls != sorted(ls):
        raise ParameterError("l_list must be even and ascending")
    rows = []
    for l in ls:
        basis = eigenbasis(l)
        counts, hits, ok = [], 0, True
        S = generate_S_l(l, kappa) if l >= 4 else None
        W = wavelength(l)
        for f in basis:
            r = restrict(f, circle)
            counts.append(r.count)
            if S is None or circle is not E3:
                continue
            zs = np.asarray(r.zeros)
            for th in S.angles:
                a = float(f(np.array([[math.cos(th), math.sin(th), 0.0]]))[0])
                b = float(f(np.array([[math.cos(th + W), math.sin(th + W), 0.0]]))[0])
                if a * b < 0:
                    hits += 1
                    ok &= bool(np.any((zs >= th) & (zs <= th + W)))
        rows.append(TotalZeroRow(l, len(basis), sum(counts), min(counts, default=0), hits, ok))
    good = [(r.l, r.total) for r in rows if r.total > 0]
    slope = float("nan")
    if len(good) >= 2:
        lx, ty = np.log([g[0] for g in good]), np.log([g[1] for g in good])
        slope = float(np.polyfit(lx, ty, 1)[0])
    return TotalZeroTable(tuple(rows), slope, kappa)
