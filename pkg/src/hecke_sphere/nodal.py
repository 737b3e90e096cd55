"""Nodal-domain counts on latitude-longitude grids, the Euler-formula bound,
symmetry checks and the random-wave comparison ensemble.

Grid layout: rows at colatitudes theta_i = i pi / (n_theta - 1).  The first
and last rows are the poles, each a single cell adjacent to every cell of
the neighbouring row; interior rows hold n_phi cells with 4-neighbour
adjacency and wraparound in longitude.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .errors import DomainError, ParameterError, SymmetryFailure, VanishingRestrictionError
from .geodesic import EQUATORS, restrict
from .harmonics import assoc_legendre_table

DEFAULT_RHO = 20
BUFFER = 1e-9
RESOLUTION_TOL = 0.02


@dataclass(frozen=True)
class SphericalGrid:
    n_theta: int
    n_phi: int
    rho: int

    @classmethod
    def for_degree(cls, l: int, rho: int = DEFAULT_RHO) -> "SphericalGrid":
        n_theta = max(rho * max(l, 1), 8)
        return cls(n_theta, 2 * n_theta, rho)

    @property
    def cells(self) -> int:
        return (self.n_theta - 2) * self.n_phi + 2

    def refined(self) -> "SphericalGrid":
        return SphericalGrid(2 * self.n_theta, 2 * self.n_phi, 2 * self.rho)

    def colatitudes(self) -> np.ndarray:
        return np.pi * np.arange(self.n_theta) / (self.n_theta - 1)

    def longitudes(self) -> np.ndarray:
        return 2 * np.pi * np.arange(self.n_phi) / self.n_phi

    def neighbour_counts(self) -> np.ndarray:
        """Neighbours per cell: interior rows first (row-major), then the two poles."""
        inner = np.full((self.n_theta - 2) * self.n_phi, 4)
        return np.concatenate([inner, [self.n_phi, self.n_phi]])


def evaluate_on_grid(l: int, coeffs, grid: SphericalGrid) -> np.ndarray:
    """Values of sum coeffs * Y_{l,m} at every grid row/column (poles repeated)."""
    c = np.asarray(coeffs, dtype=float)
    t = np.cos(grid.colatitudes())
    P = assoc_legendre_table(l, t)               # (l+1, n_theta)
    phi = grid.longitudes()
    # row factors for each m (columns ordered m = -l..l) and matching trig rows
    A = np.empty((grid.n_theta, 2 * l + 1))
    T = np.empty((2 * l + 1, grid.n_phi))
    A[:, l] = c[l] * P[0]
    T[l] = 1.0
    s2 = math.sqrt(2)
    for m in range(1, l + 1):
        A[:, l + m] = s2 * c[l + m] * P[m]
        A[:, l - m] = s2 * c[l - m] * P[m]
        T[l + m] = np.cos(m * phi)
        T[l - m] = np.sin(m * phi)
    return A @ T


@dataclass(frozen=True, eq=False)
class NodalCount:
    domain_count: int
    cell_counts: np.ndarray
    buffer_cells: int
    seam_domains: int           # domains crossing the longitude seam
    pole_domains: int           # domains containing a pole cell
    grid: SphericalGrid
    resolved: bool | None = None
    refined_count: int | None = None

    @property
    def smallest_domain_cells(self) -> int:
        return int(self.cell_counts.min())


def _label(values: np.ndarray, grid: SphericalGrid, tol: float):
    vmax = np.abs(values).max()
    if vmax == 0:
        raise DomainError("function vanishes on the grid")
    inner = values[1:-1]
    sign = np.where(np.abs(inner) < tol * vmax, 0, np.sign(inner)).astype(np.int8)
    poles = [values[0, 0], values[-1, 0]]
    pole_sign = [0 if abs(p) < tol * vmax else int(np.sign(p)) for p in poles]
    if not sign.any() and not any(pole_sign):
        raise DomainError("every cell is in the zero buffer")

    labels = np.zeros(sign.shape, dtype=np.int64)
    offset = 0
    for s in (1, -1):
        lab, n = ndimage.label(sign == s)
        labels[lab > 0] = lab[lab > 0] + offset
        offset += n
    n_lab = offset
    north, south = n_lab + 1, n_lab + 2
    rows, cols = [], []
    # longitude seam
    a, b = labels[:, 0], labels[:, -1]
    same = (a > 0) & (sign[:, 0] == sign[:, -1])
    rows += list(a[same])
    cols += list(b[same])
    seam_labels = set(a[same].tolist())
    # poles join every same-sign cell of the adjacent row
    for pole, ps, row in ((north, pole_sign[0], 0), (south, pole_sign[1], -1)):
        if ps == 0:
            continue
        hit = labels[row][sign[row] == ps]
        rows += list(hit)
        cols += [pole] * len(hit)
        rows.append(pole)
        cols.append(pole)
    n_nodes = n_lab + 3
    g = coo_matrix((np.ones(len(rows)), (rows, cols)), shape=(n_nodes, n_nodes))
    _, comp = connected_components(g, directed=False)
    # node 0 is the background; nodes for absent poles stay isolated and unused
    used = np.zeros(n_nodes, dtype=bool)
    used[1:n_lab + 1] = True
    for pole, ps in ((north, pole_sign[0]), (south, pole_sign[1])):
        used[pole] = ps != 0
    sizes = np.bincount(labels.ravel(), minlength=n_nodes).astype(np.int64)
    sizes[0] = 0
    sizes[north] = 1 if pole_sign[0] else 0
    sizes[south] = 1 if pole_sign[1] else 0
    comp_ids = np.unique(comp[used])
    cell_counts = np.array([sizes[(comp == k) & used].sum() for k in comp_ids])
    seam = len({comp[x] for x in seam_labels}) if seam_labels else 0
    pole_dom = len({comp[p] for p, s in ((north, pole_sign[0]), (south, pole_sign[1])) if s})
    buffer_cells = int((sign == 0).sum()) + sum(1 for s in pole_sign if s == 0)
    return len(comp_ids), cell_counts, buffer_cells, seam, pole_dom


def count_nodal_domains(f, grid: SphericalGrid | None = None, check_resolution: bool = True,
                        l: int | None = None) -> NodalCount:
    """Connected same-sign components of f on the grid.

    ``f`` is anything with ``l`` and ``coeffs`` (real spherical harmonic
    coordinates), or a bare coefficient vector together with ``l``.  With
    ``check_resolution`` the count is repeated at twice the resolution and
    the result marked unresolved if the two differ by more than 2%.
    """
    if l is None:
        l, coeffs = f.l, f.coeffs
    else:
        coeffs = f
    grid = grid or SphericalGrid.for_degree(l)
    vals = evaluate_on_grid(l, coeffs, grid)
    n, sizes, buf, seam, pole = _label(vals, grid, BUFFER)
    resolved = refined = None
    if check_resolution:
        g2 = grid.refined()
        refined = _label(evaluate_on_grid(l, coeffs, g2), g2, BUFFER)[0]
        resolved = abs(refined - n) <= RESOLUTION_TOL * max(n, refined)
    return NodalCount(n, sizes, buf, seam, pole, grid, resolved, refined)


def euler_lower_bound(N: int, l: int = 0) -> int:
    """Certified lower bound 1 + N/2 (rounded up) on the nodal-domain count."""
    if l % 2:
        raise ParameterError("the Euler bound needs even l")
    if N < 0:
        raise ParameterError("zero count must be non-negative")
    return 1 + (N + 1) // 2


@dataclass(frozen=True)
class SymmetryReport:
    l: int
    max_deviation: dict
    equator_zeros: dict
    failures: tuple

    @property
    def ok(self) -> bool:
        return not self.failures


_REFLECTIONS = {
    "R_x": np.diag([1.0, -1.0, -1.0]),
    "R_y": np.diag([-1.0, 1.0, -1.0]),
    "R_z": np.diag([-1.0, -1.0, 1.0]),
}


def gamma_symmetry_check(f, n_points: int = 1000, seed: int = 0, tol: float = 1e-9,
                         strict: bool = False) -> SymmetryReport:
    """Check invariance under the three half-turns and equal zero counts on E1, E2, E3."""
    if f.l % 2:
        raise ParameterError("symmetry check needs even l")
    rng = np.random.default_rng(seed)
    P = rng.normal(size=(n_points, 3))
    P /= np.linalg.norm(P, axis=1, keepdims=True)
    base = f(P)
    dev = {name: float(np.abs(f(P @ R.T) - base).max()) for name, R in _REFLECTIONS.items()}
    failures = [f"{name} deviation {d:.2e}" for name, d in dev.items() if d > tol]
    zeros = {}
    for name, C in EQUATORS.items():
        try:
            zeros[name] = restrict(f, C).count
        except VanishingRestrictionError:
            zeros[name] = None
            failures.append(f"restriction to {name} vanishes")
    if len(set(zeros.values())) > 1:
        failures.append(f"unequal equator zero counts {zeros}")
    rep = SymmetryReport(f.l, dev, zeros, tuple(failures))
    if strict and failures:
        raise SymmetryFailure("; ".join(failures))
    return rep


@dataclass(frozen=True, eq=False)
class RandomWave:
    l: int
    coeffs: np.ndarray
    seed: object = None

    def __call__(self, points):
        from .harmonics import real_sph_harm
        return real_sph_harm(self.l, points) @ self.coeffs


def sample_random_wave(l: int, seed) -> RandomWave:
    """Gaussian unit-norm element of H_l, reproducible from ``seed``."""
    rng = np.random.default_rng(seed)
    while True:
        c = rng.standard_normal(2 * l + 1)
        n = np.linalg.norm(c)
        if n > 0:
            return RandomWave(l, c / n, seed)


@dataclass(frozen=True, eq=False)
class EnsembleStats:
    l: int
    n_samples: int
    seed: int
    counts: np.ndarray
    mean: float            # of N / l^2
    variance: float
    courant_ok: bool
    resolved: tuple


def ensemble_stats(l: int, n_samples: int, seed: int = 0, rho: int = DEFAULT_RHO,
                   resolution_checks: int = 3) -> EnsembleStats:
    """Mean and variance of N(f)/l^2 over random waves; sample i uses seed (seed, i).

    The first ``resolution_checks`` samples are recounted at doubled
    resolution.
    """
    if n_samples < 2:
        raise ParameterError("need at least two samples")
    grid = SphericalGrid.for_degree(l, rho)
    counts, flags = [], []
    for i in range(n_samples):
        w = sample_random_wave(l, (seed, i))
        nc = count_nodal_domains(w, grid, check_resolution=i < resolution_checks)
        counts.append(nc.domain_count)
        if nc.resolved is not None:
            flags.append(nc.resolved)
    counts = np.array(counts)
    r = counts / l ** 2
    return EnsembleStats(l, n_samples, seed, counts, float(r.mean()), float(r.var(ddof=1)),
                         bool(np.all(counts <= (l + 1) ** 2)), tuple(flags))
