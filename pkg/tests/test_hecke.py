import json
import math

import numpy as np
import pytest

from hecke_sphere.errors import ParameterError
from hecke_sphere.harmonics import legendre, real_sph_harm
from hecke_sphere.hecke import (
    DEFAULT_PROBES,
    UNIT_COUNT,
    character_dimension,
    complete_basis,
    eigenbasis,
    hecke_matrix,
    hecke_operator,
    invariant_dimension,
    invariant_subspace,
    projector_rank,
    recursion_check,
    rotation_matrix,
)
from hecke_sphere.quat import divisor_sum, enumerate_norm, rotation_of
from hecke_sphere.serialize import (
    eigenbasis_from_dict,
    eigenbasis_to_dict,
    hecke_matrix_from_dict,
    hecke_matrix_to_dict,
)


# ------------------------------------------------------------- exact T_m


@pytest.mark.parametrize("m", [1, 3, 5, 9])
def test_l0_is_order_count(m):
    H = hecke_matrix(0, m)
    assert H.exact.entries() == [[24 * divisor_sum(m)]]
    assert H.trace() == 24 * divisor_sum(m)


def test_l1_unit_sum_vanishes():
    assert hecke_matrix(1, 1).exact.is_zero()


def test_even_m_rejected():
    with pytest.raises(ParameterError):
        hecke_matrix(4, 2)


def test_self_adjoint_exact():
    H = hecke_matrix(4, 3)
    assert H.is_self_adjoint()
    assert H.ortho_asymmetry < 1e-12


@pytest.mark.parametrize("l,m", [(2, 3), (4, 3), (6, 5), (4, 9)])
def test_coset_route_matches_full_sum(l, m):
    assert hecke_matrix(l, m).exact == hecke_matrix(l, m, method="full").exact


def test_recursion_examples():
    r = recursion_check(6, 3, 5)
    assert r.holds and r.commutes
    r = recursion_check(6, 3, 3)
    assert r.holds and r.residual.is_zero()
    # T_3^2 = 24 (T_9 + 3 T_1), spelled out
    A = hecke_matrix(6, 3).exact
    rhs = hecke_matrix(6, 9).exact.scale(24) + hecke_matrix(6, 1).exact.scale(72)
    assert A @ A == rhs


def test_recursion_breaks_for_wrong_constant():
    A = hecke_matrix(6, 3).exact
    B = hecke_matrix(6, 5).exact
    assert not (A @ B == hecke_matrix(6, 15).exact.scale(23))


@pytest.mark.parametrize("l", [4, 6, 8])
def test_exact_and_float_spectra_agree(l):
    for m in (3, 5):
        a = np.sort(np.linalg.eigvalsh(hecke_matrix(l, m).ortho))
        b = np.sort(np.linalg.eigvalsh(hecke_operator(l, m)))
        assert np.abs(a - b).max() < 1e-9 * max(1, np.abs(a).max())


def test_float_operator_matches_direct_sum():
    # T_3 as the plain sum over O(3), no coset shortcut
    l = 6
    direct = sum(rotation_matrix(l, rotation_of(g).as_float()) for g in enumerate_norm(3))
    assert np.abs((direct + direct.T) / 2 - hecke_operator(l, 3)).max() < 1e-9


# -------------------------------------------------------------- dimension


@pytest.mark.parametrize("l,d", [(0, 1), (1, 0), (2, 0), (3, 1), (4, 1), (6, 2)])
def test_dimension_examples(l, d):
    assert character_dimension(l) == d
    assert invariant_dimension(l) == d


def test_dimension_agreement_and_growth():
    for l in range(0, 121):
        d = invariant_dimension(l)
        assert d == character_dimension(l)
        assert abs(d - l / 6) <= 1


@pytest.mark.parametrize("l", [0, 3, 4, 6, 9, 12])
def test_projector_rank_matches(l):
    assert projector_rank(l) == invariant_dimension(l)


def test_invariant_subspace_is_fixed_by_units():
    sub = invariant_subspace(12)
    P = hecke_operator(12, 1) / UNIT_COUNT
    assert np.abs(P @ sub.basis - sub.basis).max() < 1e-10


# ------------------------------------------------------------ eigenbasis


def test_eigenbasis_small_cases():
    assert len(eigenbasis(4)) == 1
    B = eigenbasis(6)
    assert len(B) == 2
    assert abs(B[0].coeffs @ B[1].coeffs) < 1e-12
    assert abs(B[0].eigenvalues[3] - B[1].eigenvalues[3]) > 1e-6


def test_eigenbasis_rejects_bad_input():
    with pytest.raises(ParameterError):
        eigenbasis(5)
    with pytest.raises(ParameterError):
        eigenbasis(6, probe_set=())
    with pytest.raises(ParameterError):
        eigenbasis(6, probe_set=(2,))


@pytest.mark.parametrize("l", [12, 24, 36])
def test_eigenbasis_invariants(l):
    B = eigenbasis(l)
    C = np.array([f.coeffs for f in B])
    assert np.abs(C @ C.T - np.eye(len(B))).max() < 1e-10
    P = hecke_operator(l, 1) / UNIT_COUNT
    for f in B:
        assert np.linalg.norm(P @ f.coeffs - f.coeffs) < 1e-10
        for m in DEFAULT_PROBES:
            assert f.residuals[m] <= 1e-8
        k = int(np.argmax(np.abs(f.coeffs)))
        assert f.coeffs[k] > 0
        assert f.eigenvalues[1] == pytest.approx(24.0, abs=1e-8)


def test_multiplicativity_up_to_40():
    for l in range(4, 41, 2):
        for f in eigenbasis(l):
            e = f.eigenvalues
            scale = 24 * 24 * math.sqrt(15)
            assert abs(e[3] * e[5] - 24 * e[15]) <= 1e-6 * max(scale, abs(e[3] * e[5]))
            # and the square relation T_3^2 = 24 (T_9 + 3 T_1)
            assert abs(e[3] ** 2 - 24 * (f.with_eigenvalues([9]).eigenvalues[9] + 3 * 24)) < 1e-6 * scale


def test_deligne_window():
    for l in range(2, 61, 2):
        for f in eigenbasis(l):
            for p in (3, 5, 7, 11, 13):
                assert abs(f.normalized[p]) <= 2 + 1e-6


def test_eigenfunctions_are_unit_invariant_pointwise():
    f = eigenbasis(10)[0]
    rng = np.random.default_rng(5)
    P = rng.normal(size=(50, 3))
    P /= np.linalg.norm(P, axis=1, keepdims=True)
    base = f(P)
    for g in enumerate_norm(1):
        assert np.abs(f(P @ rotation_of(g).as_float().T) - base).max() < 1e-10


@pytest.mark.parametrize("l", [10, 40])
def test_pretrace_on_complete_basis(l):
    Bhat = complete_basis(l)
    assert np.abs(Bhat.T @ Bhat - np.eye(2 * l + 1)).max() < 1e-10
    rng = np.random.default_rng(l)
    X = rng.normal(size=(100, 3))
    Y = rng.normal(size=(100, 3))
    X /= np.linalg.norm(X, axis=1, keepdims=True)
    Y /= np.linalg.norm(Y, axis=1, keepdims=True)
    lhs = np.einsum("ni,ni->n", real_sph_harm(l, X) @ Bhat, real_sph_harm(l, Y) @ Bhat)
    rhs = (2 * l + 1) * legendre(l, np.clip(np.einsum("ni,ni->n", X, Y), -1, 1))
    assert np.abs(lhs - rhs).max() <= 1e-9 * (2 * l + 1)


# --------------------------------------------------------- serialization


def test_hecke_matrix_json_roundtrip():
    H = hecke_matrix(4, 3)
    text = json.dumps(hecke_matrix_to_dict(H))
    back = hecke_matrix_from_dict(json.loads(text))
    assert back.exact == H.exact
    assert json.loads(text)["schema_version"] == 1


def test_eigenbasis_json_roundtrip():
    B = eigenbasis(12)
    back = eigenbasis_from_dict(json.loads(json.dumps(eigenbasis_to_dict(12, B))))
    for a, b in zip(B, back):
        assert np.array_equal(a.coeffs, b.coeffs)
        assert a.eigenvalues == b.eigenvalues
