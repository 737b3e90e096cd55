import math
from fractions import Fraction

import numpy as np
import pytest
from scipy.special import lpmv

from hecke_sphere.errors import DomainError
from hecke_sphere.harmonics import (
    BOUNDY_INTERVAL,
    LegendreEvaluator,
    assoc_legendre_table,
    build_basis,
    equator_value,
    laplacian,
    legendre,
    projection_kernel,
    real_sph_harm,
    sphere_moment,
    sphere_quadrature,
    wavelength,
)
from hecke_sphere.quat import SpherePoint


def _random_points(n, seed):
    rng = np.random.default_rng(seed)
    P = rng.normal(size=(n, 3))
    return P / np.linalg.norm(P, axis=1, keepdims=True)


def _exact_pivots(gram):
    """LDL^T pivots of an exact symmetric matrix (all positive iff PD)."""
    A = [row[:] for row in gram.entries()]
    n = len(A)
    piv = []
    for k in range(n):
        p = A[k][k]
        piv.append(p)
        if p == 0:
            break
        for i in range(k + 1, n):
            f = A[i][k] / p
            for j in range(k, n):
                A[i][j] -= f * A[k][j]
    return piv


# ---------------------------------------------------------------- Legendre


@pytest.mark.parametrize("l", [0, 2, 4, 10, 50])
def test_legendre_endpoints(l):
    assert legendre(l, 1.0) == pytest.approx(1.0, abs=1e-14)
    assert legendre(l, -1.0) == pytest.approx(1.0, abs=1e-14)


def test_legendre_small_values():
    assert legendre(2, 0.0) == -0.5
    t = np.linspace(-1, 1, 11)
    assert np.allclose(legendre(3, t), (5 * t ** 3 - 3 * t) / 2, atol=1e-15)


def test_legendre_recurrence_and_bound():
    t = np.linspace(-1, 1, 2001)
    for n in range(1, 40):
        lhs = (n + 1) * legendre(n + 1, t)
        rhs = (2 * n + 1) * t * legendre(n, t) - n * legendre(n - 1, t)
        assert np.abs(lhs - rhs).max() < 1e-12
        assert np.abs(legendre(n, t)).max() <= 1 + 1e-12


def test_legendre_rejects_outside_interval():
    with pytest.raises(DomainError):
        legendre(3, 1.01)


def test_kernel_value_at_first_wavelength():
    v = legendre(100, math.cos(wavelength(100)))
    assert -0.28 <= v <= -0.24


def test_wavelength_values():
    assert wavelength(1) == pytest.approx(math.pi)
    assert wavelength(0) == pytest.approx(3 * math.pi)
    assert wavelength(100) == pytest.approx(3 * math.pi / 201)
    assert LegendreEvaluator(7).wavelength == wavelength(7)


def test_plsize_constant():
    th = np.linspace(1e-6, math.pi - 1e-6, 10_000)
    worst = 0.0
    for l in range(1, 201):
        p = np.abs(legendre(l, np.cos(th)))
        worst = max(worst, (p / np.minimum(1, (l * np.sin(th)) ** -0.5)).max())
    assert worst <= 1.1


# --------------------------------------------- associated Legendre / real Y


def test_assoc_legendre_against_scipy():
    t = np.linspace(-0.99, 0.99, 37)
    for l in (0, 1, 5, 12, 30):
        tab = assoc_legendre_table(l, t)
        for m in range(l + 1):
            norm = math.sqrt((2 * l + 1) * math.factorial(l - m) / math.factorial(l + m))
            ref = norm * lpmv(m, l, t) * (-1) ** m      # undo Condon-Shortley
            assert np.allclose(tab[m], ref, atol=1e-12 * max(1, np.abs(ref).max()))


@pytest.mark.parametrize("l", [0, 3, 8, 17])
def test_real_harmonics_orthonormal(l):
    X, w = sphere_quadrature(2 * l)
    Y = real_sph_harm(l, X)
    assert np.abs((Y * w[:, None]).T @ Y - np.eye(2 * l + 1)).max() < 1e-12


def test_parseval_random_unit_vectors():
    rng = np.random.default_rng(3)
    for l in (4, 11, 25):
        c = rng.normal(size=2 * l + 1)
        c /= np.linalg.norm(c)
        X, w = sphere_quadrature(2 * l)
        assert abs(w @ (real_sph_harm(l, X) @ c) ** 2 - 1) < 1e-8


def test_quadrature_weights_sum_to_one():
    _, w = sphere_quadrature(10)
    assert w.sum() == pytest.approx(1.0, abs=1e-14)


# ---------------------------------------------------------- exact basis


def test_moments_low_order():
    assert sphere_moment(0, 0, 0) == 1
    assert sphere_moment(2, 0, 0) == Fraction(1, 3)
    assert sphere_moment(2, 2, 0) == Fraction(1, 15)
    assert sphere_moment(1, 1, 0) == 0


def test_basis_l0():
    B = build_basis(0)
    assert B.dim == 1
    assert B.gram.entries() == [[Fraction(1)]]


def test_basis_l1_coordinate_functions():
    B = build_basis(1)
    g = B.gram.entries()
    # each basis polynomial is a scaled coordinate function
    for i, row in enumerate(B.polynomials()):
        assert sum(1 for v in row if v) == 1
        s = B.scales[i]
        assert g[i][i] == Fraction(1, 3) * s * s
    assert all(g[i][j] == 0 for i in range(3) for j in range(3) if i != j)


@pytest.mark.parametrize("l", [0, 1, 2, 6, 9])
def test_basis_harmonic_and_positive_definite(l):
    B = build_basis(l)
    assert B.dim == 2 * l + 1
    for row in B.polynomials():
        assert laplacian(l, row) == {}
    assert B.gram == B.gram.T
    assert all(p > 0 for p in _exact_pivots(B.gram))


@pytest.mark.parametrize("l", [3, 6])
def test_basis_first_monomial_positive(l):
    for row in build_basis(l).polynomials():
        first = next(v for v in row if v != 0)
        assert first > 0


@pytest.mark.parametrize("l", [0, 1, 6, 20])
def test_orthonormalizing_transform(l):
    assert build_basis(l).orthonormality_residual() < 1e-12


def test_exact_basis_matches_float_model_span():
    # the exact polynomials, orthonormalized, evaluate like an orthogonal
    # transform of the real spherical harmonics
    l = 5
    B = build_basis(l)
    X, w = sphere_quadrature(2 * l)
    vals = np.array([B.evaluate(e, X) for e in np.eye(B.dim)]).T @ B.ortho_transform
    G = (vals * w[:, None]).T @ vals
    assert np.abs(G - np.eye(B.dim)).max() < 1e-10
    Y = real_sph_harm(l, X)
    Q = (Y * w[:, None]).T @ vals
    assert np.abs(Q.T @ Q - np.eye(B.dim)).max() < 1e-10


# ------------------------------------------------------- equator values


def test_equator_value_examples():
    assert equator_value(2, 1).value == 0
    assert equator_value(2, 0).value == pytest.approx(math.sqrt(5) / 2)
    with pytest.raises(DomainError):
        equator_value(3, 4)


def test_equator_value_matches_recurrence():
    for l in range(0, 41):
        tab = assoc_legendre_table(l, np.array(0.0))
        for m in range(-l, l + 1):
            ref = tab[abs(m)]          # complex harmonic P e^{im phi}: no sqrt(2)
            v = equator_value(l, m).value
            if (l - m) % 2:
                assert v == 0 and abs(ref) < 1e-12
            else:
                assert v * v == pytest.approx(float(ref) ** 2, rel=1e-10)


def test_equator_value_floor():
    for l in range(0, 61, 2):
        for m in range(-l, l + 1, 2):
            assert equator_value(l, m).value >= 0.8


def test_equator_value_frozen_interval():
    c1, c2 = BOUNDY_INTERVAL
    for l in range(1, 201):
        for m in range(-l, l + 1):
            if (l - m) % 2:
                continue
            y = equator_value(l, m).value
            q = y * y * math.sqrt((1 + l + abs(m)) * (1 + l - abs(m))) / l
            assert c1 <= q <= c2


# ------------------------------------------------------------ kernel


def test_kernel_diagonal():
    x = SpherePoint.from_lattice(1, 2, 2)
    assert projection_kernel(7, x, x) == pytest.approx(15.0)


def test_kernel_reproduces_zonal_harmonic():
    l = 4
    X, w = sphere_quadrature(2 * l)
    phi = lambda P: legendre(l, P[:, 2])            # z^l-type zonal harmonic
    x = SpherePoint.from_float([0.3, -0.5, 0.8])
    K = (2 * l + 1) * legendre(l, np.clip(X @ x.vector(), -1, 1))
    approx = w @ (K * phi(X))
    exact = phi(x.vector()[None])[0]
    assert abs(approx - exact) <= 1e-8 * abs(exact)


def test_addition_theorem():
    l = 10
    P = _random_points(20, 1)
    Q = _random_points(20, 2)
    lhs = np.einsum("ni,ni->n", real_sph_harm(l, P), real_sph_harm(l, Q))
    for a, b, v in zip(P, Q, lhs):
        k = projection_kernel(l, SpherePoint.from_float(a), SpherePoint.from_float(b))
        assert abs(v - k) < 1e-10
