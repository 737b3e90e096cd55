import itertools
import math
import random
from fractions import Fraction

import pytest

from hecke_sphere.errors import DomainError, ParameterError
from hecke_sphere.quat import (
    HurwitzQuaternion,
    SpherePoint,
    act,
    coset_representatives,
    divisor_sum,
    enumerate_norm,
    rotation_of,
    unit_group,
)


def box_count(m):
    # independent 4-D brute force over the doubled-coordinate box
    r = math.ceil(2 * math.sqrt(m))
    n = 0
    for q in itertools.product(range(-r, r + 1), repeat=4):
        if len({v & 1 for v in q}) == 1 and sum(v * v for v in q) == 4 * m:
            n += 1
    return n


@pytest.mark.parametrize("m,expected", [(1, 24), (3, 96), (9, 312)])
def test_enumerate_counts(m, expected):
    els = enumerate_norm(m)
    assert len(els) == expected == box_count(m)
    assert len(set(els)) == len(els)
    assert all(g.norm == m for g in els)


def test_enumerate_sorted_and_sigma():
    els = enumerate_norm(15)
    assert [g.doubled for g in els] == sorted(g.doubled for g in els)
    for m in range(1, 60, 2):
        assert len(enumerate_norm(m)) == 24 * sum(d for d in range(1, m + 1) if m % d == 0)


@pytest.mark.parametrize("m", [0, 2, -3, 10])
def test_enumerate_rejects(m):
    with pytest.raises(ParameterError):
        enumerate_norm(m)


def test_parity_invariant():
    with pytest.raises(DomainError):
        HurwitzQuaternion(1, 0, 0, 0)
    assert HurwitzQuaternion.from_coords(Fraction(1, 2), Fraction(1, 2), Fraction(-1, 2), Fraction(1, 2)).norm == 1


def test_rotation_examples():
    assert rotation_of(HurwitzQuaternion(2, 0, 0, 0)).entries == ((1, 0, 0), (0, 1, 0), (0, 0, 1))
    R = rotation_of(HurwitzQuaternion(0, 2, 0, 0))
    assert R.entries == ((1, 0, 0), (0, -1, 0), (0, 0, -1))
    C = rotation_of(HurwitzQuaternion(1, 1, 1, 1))
    # i -> j, j -> k, k -> i
    assert C.entries == ((0, 0, 1), (1, 0, 0), (0, 1, 0))
    with pytest.raises(DomainError):
        rotation_of(HurwitzQuaternion(0, 0, 0, 0))


def test_rotation_exact_orthogonal():
    for m in (1, 3, 5, 9, 15):
        for g in enumerate_norm(m):
            R = rotation_of(g)
            assert R.is_orthogonal()
            assert rotation_of(-g) == R


def test_act_examples():
    k = SpherePoint.from_lattice(0, 0, 1)
    assert act(HurwitzQuaternion(2, 0, 0, 0), k) == k
    assert act(HurwitzQuaternion(0, 2, 0, 0), k).lattice == (0, 0, -1)


def test_composition_law():
    rng = random.Random(7)
    pool = [g for m in (1, 3, 5, 7, 9, 11, 13, 15) for g in enumerate_norm(m)]
    for _ in range(100):
        g, d = rng.choice(pool), rng.choice(pool)
        x = SpherePoint.from_lattice(rng.randint(-5, 5), rng.randint(-5, 5), rng.randint(1, 5))
        lhs = act(g * d, x)
        rhs = act(g, act(d, x))
        assert lhs.lattice == rhs.lattice
        assert sum(c * c for c in lhs.lattice) == lhs.height


def test_act_float_matches_exact():
    x = SpherePoint.from_lattice(1, 2, 2)
    xf = SpherePoint.from_float(x.coords)
    for g in enumerate_norm(7)[:20]:
        a, b = act(g, x), act(g, xf)
        assert max(abs(p - q) for p, q in zip(a.coords, b.coords)) < 1e-14


def test_unit_group():
    U = unit_group()
    assert len(U) == 24
    S = set(U)
    for u, v in itertools.product(U, U):
        assert u * v in S
    for u in U:
        assert u.conjugate() in S and u * u.conjugate() == HurwitzQuaternion(2, 0, 0, 0)
    assert len({rotation_of(u) for u in U}) == 12


@pytest.mark.parametrize("m", [1, 3, 5, 9, 15, 21])
def test_coset_representatives(m):
    reps = coset_representatives(m)
    assert len(reps) == divisor_sum(m)
    U = unit_group()
    cover = sorted(u * r for u in U for r in reps)
    assert cover == enumerate_norm(m)


def test_sphere_point_height():
    p = SpherePoint.from_rational([Fraction(3, 5), Fraction(4, 5), 0])
    assert p.lattice == (3, 4, 0) and p.height == 25
    assert SpherePoint.from_lattice(2, 2, 0).height == 2
    with pytest.raises(DomainError):
        SpherePoint.from_rational([Fraction(1, 2), 0, 0])
