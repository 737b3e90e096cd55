import math

import numpy as np
import pytest

from hecke_sphere.diophantine import (
    BOOK_CONSTANT,
    STABILIZER_MAX_H50,
    book_shape_scan,
    count_near,
    generate_S_l,
    height,
    points_up_to_height,
    stabilizer_count,
    stabilizer_max,
    verify_move_bound,
)
from hecke_sphere.errors import DomainError, KappaViolation, ParameterError
from hecke_sphere.harmonics import wavelength
from hecke_sphere.quat import SpherePoint, act, divisor_sum, enumerate_norm

I = SpherePoint.from_lattice(1, 0, 0)


def test_height_examples():
    assert height(0, 0, 1).height == 1
    assert height(1, 1, 0).height == 2
    p = height(3, 4, 0)
    assert p.height == 25 and p.lattice == (3, 4, 0)
    assert height(6, 8, 0).height == 25
    assert height(*height(2, 4, 4).lattice) == height(2, 4, 4)
    with pytest.raises(DomainError):
        height(0, 0, 0)


def test_rational_point_height_is_minimal():
    # (3/5, 4/5, 0) needs sqrt(h) divisible by 5
    p = SpherePoint.from_rational(["3/5", "4/5", "0"])
    assert p.height == 25
    for h in range(1, 25):
        assert any(abs(math.sqrt(h) * c - round(math.sqrt(h) * c)) > 1e-9 for c in p.coords)


def test_points_up_to_height():
    pts = points_up_to_height(3)
    assert {p.height for p in pts} == {1, 2, 3}
    assert len(pts) == 6 + 12 + 8


def test_unit_count_at_least_two():
    for x in points_up_to_height(25):
        rep = count_near(x, 1, 0.0)
        assert rep.count >= 2
        assert rep.count == len(rep.witnesses)


def test_count_monotone_in_delta():
    x = SpherePoint.from_lattice(1, 2, 2)
    prev = 0
    for d in np.linspace(0, math.pi / 2, 40):
        c = count_near(x, 9, float(d)).count
        assert c >= prev
        prev = c


def test_count_at_right_angle_is_everything():
    for x in (I, SpherePoint.from_lattice(1, 1, 1), SpherePoint.from_lattice(2, 3, 6)):
        for m in (1, 3, 9):
            assert count_near(x, m, math.pi / 2).count == 24 * divisor_sum(m)


def test_N_i_9():
    rep = count_near(I, 9, 0.0)
    assert rep.count == 8
    assert rep.fixing == 4 and rep.antipodal == 4
    for g in rep.witnesses:
        assert act(g, I) in (I, -I)


def test_count_rejects_even_m():
    with pytest.raises(ParameterError):
        count_near(I, 4, 0.0)


def test_witnesses_satisfy_predicate_exactly():
    x = SpherePoint.from_lattice(1, 1, 0)
    y = SpherePoint.from_lattice(1, 1, 1)
    delta = 0.7
    rep = count_near(x, 15, delta, y)
    for g in enumerate_norm(15):
        c = float(np.dot(act(g, x).coords, y.coords))
        inside = abs(c) >= math.cos(delta)
        assert inside == (g in rep.witnesses)


def test_move_bound_exhaustive():
    pts = points_up_to_height(25)
    for m in range(1, 16, 2):
        rep = verify_move_bound(pts, m)
        assert rep.violations == ()
        # the middle quantity is integral, so the half-integer bound is never attained
        assert rep.sharp_cases == 0


def test_move_bound_excludes_fixing_elements():
    rep = verify_move_bound(I, 9)
    assert rep.checked == 312 - 8


def test_stabilizer_examples():
    rep = stabilizer_count(I, 3, 3)
    assert rep.count == 8 and rep.count % 2 == 0
    for x in points_up_to_height(6):
        assert stabilizer_count(x, 3, 5).count % 2 == 0
    with pytest.raises(ParameterError):
        stabilizer_count(I, 9, 3)
    with pytest.raises(ParameterError):
        stabilizer_count(I, 2, 3)


def test_stabilizer_max_regression():
    best, _ = stabilizer_max(50)
    assert best == STABILIZER_MAX_H50


def test_book_shape_regression():
    scan = book_shape_scan()
    assert scan.max_ratio <= BOOK_CONSTANT


# ------------------------------------------------------------ sample sets


def test_S_l_density():
    l, kappa = 10_000, 0.05
    S = generate_S_l(l, kappa)
    target = 6 / math.pi ** 2
    assert abs(len(S.points) / (kappa * l / 2) - target) <= 0.15 * target
    for x in S.points:
        a, b, c = x.lattice
        assert c == 0 and a > 0 and b > 0 and math.gcd(a, b) == 1
        assert x.height < kappa * l <= l ** 1.5


def test_S_l_separation_and_partners():
    S = generate_S_l(50, 0.1)
    W = wavelength(50)
    P = np.array([p.coords for p in S.points])
    for i in range(len(P)):
        for j in range(i + 1, len(P)):
            assert math.acos(min(1, P[i] @ P[j])) >= 3 * W
    for x, z in zip(S.points, S.partners):
        assert math.acos(min(1.0, float(np.dot(x.coords, z.coords)))) == pytest.approx(W, abs=1e-12)
    # arcs [x, z(x)] are disjoint: consecutive angles differ by more than W
    assert all(b - a > W for a, b in zip(S.angles, S.angles[1:]))


def test_S_l_kappa_violation_names_pair():
    with pytest.raises(KappaViolation, match="points"):
        generate_S_l(400, 5.0)
    with pytest.raises(ParameterError):
        generate_S_l(2, 0.05)
