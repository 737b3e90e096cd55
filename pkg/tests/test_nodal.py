import numpy as np
import pytest

from hecke_sphere.errors import DomainError, ParameterError, SymmetryFailure
from hecke_sphere.geodesic import E1, restrict
from hecke_sphere.hecke import HeckeEigenfunction, eigenbasis
from hecke_sphere.nodal import (
    SphericalGrid,
    count_nodal_domains,
    ensemble_stats,
    euler_lower_bound,
    evaluate_on_grid,
    gamma_symmetry_check,
    sample_random_wave,
)
from hecke_sphere.harmonics import real_sph_harm


def _unit(l, index):
    c = np.zeros(2 * l + 1)
    c[l + index] = 1.0
    return c


def test_grid_shape_and_adjacency():
    g = SphericalGrid.for_degree(12)
    assert g.n_theta >= 20 * 12 and g.n_phi == 2 * g.n_theta
    nb = g.neighbour_counts()
    assert len(nb) == g.cells
    assert set(nb[:-2]) == {4}


def test_grid_values_match_pointwise_evaluation():
    l = 7
    c = np.random.default_rng(0).normal(size=2 * l + 1)
    g = SphericalGrid(12, 10, 1)
    V = evaluate_on_grid(l, c, g)
    th, ph = np.meshgrid(g.colatitudes(), g.longitudes(), indexing="ij")
    P = np.stack([np.sin(th) * np.cos(ph), np.sin(th) * np.sin(ph), np.cos(th)], -1).reshape(-1, 3)
    assert np.abs(V.ravel() - real_sph_harm(l, P) @ c).max() < 1e-12


def test_zonal_bands():
    assert count_nodal_domains(_unit(10, 0), l=10).domain_count == 11


def test_sectoral_wedges():
    r = count_nodal_domains(_unit(8, 8), l=8)
    assert r.domain_count == 16
    assert r.resolved


def test_cells_partition():
    f = eigenbasis(14)[0]
    r = count_nodal_domains(f, check_resolution=False)
    assert r.domain_count >= 1
    assert r.cell_counts.sum() + r.buffer_cells == r.grid.cells


def test_zero_function_rejected():
    with pytest.raises(DomainError):
        count_nodal_domains(np.zeros(9), l=4)


def test_euler_bound_values():
    assert euler_lower_bound(0) == 1
    assert euler_lower_bound(6) == 4
    assert euler_lower_bound(7) == 5
    with pytest.raises(ParameterError):
        euler_lower_bound(6, l=5)


@pytest.mark.parametrize("l", range(4, 21, 2))
def test_euler_and_courant_on_eigenbasis(l):
    for f in eigenbasis(l):
        n = count_nodal_domains(f).domain_count
        N = restrict(f, E1).count
        assert euler_lower_bound(N, l) <= n <= (l + 1) ** 2


def test_symmetry_check():
    rep = gamma_symmetry_check(eigenbasis(4)[0])
    assert rep.ok
    for f in eigenbasis(6):
        zs = gamma_symmetry_check(f).equator_zeros
        assert len(set(zs.values())) == 1


def test_symmetry_check_reports_failure():
    bad = HeckeEigenfunction(4, _unit(4, 1), {})
    rep = gamma_symmetry_check(bad)
    assert not rep.ok
    with pytest.raises(SymmetryFailure, match="R_"):
        gamma_symmetry_check(bad, strict=True)
    with pytest.raises(ParameterError):
        gamma_symmetry_check(HeckeEigenfunction(5, _unit(5, 0), {}))


def test_antipodal_symmetry_even_l():
    rng = np.random.default_rng(2)
    P = rng.normal(size=(200, 3))
    P /= np.linalg.norm(P, axis=1, keepdims=True)
    for l in (6, 12):
        w = sample_random_wave(l, 11)
        assert np.abs(w(P) - w(-P)).max() < 1e-10


def test_random_wave_determinism():
    a = sample_random_wave(20, 7)
    b = sample_random_wave(20, 7)
    assert np.array_equal(a.coeffs, b.coeffs)
    assert abs(np.linalg.norm(a.coeffs) - 1) < 1e-12
    assert not np.array_equal(a.coeffs, sample_random_wave(20, 8).coeffs)


def test_ensemble_small_run():
    s = ensemble_stats(16, 6, seed=3, resolution_checks=1)
    assert s.courant_ok
    assert len(s.counts) == 6
    assert 0 < s.mean < 1
    with pytest.raises(ParameterError):
        ensemble_stats(16, 1)
