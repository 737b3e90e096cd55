"""Acceptance checks, one function per numbered criterion.

Each check returns a :class:`CriterionResult`; ``run_all`` runs a selection
and ``main`` prints one PASS/FAIL line per criterion.  Where a criterion
needs an oracle that the library itself would otherwise provide, the check
computes it by separate code (box counting in numpy, sympy divisor sums,
plain Legendre evaluation).
"""

from __future__ import annotations

import argparse
import datetime as _dt
import json
import math
import sys
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from sympy import divisor_sigma

from . import __version__
from .annihilator import AmplifierVector, spectral_identity, total_zero_experiment
from .diophantine import (
    STABILIZER_MAX_H50,
    points_up_to_height,
    stabilizer_count,
    stabilizer_max,
    verify_move_bound,
)
from .geodesic import E1, EQUATORS, RESTRICTION_L2_FLOOR, companion_zero_count, count_zeros, restrict, restriction_fourier
from .harmonics import legendre, real_sph_harm, wavelength
from .hecke import character_dimension, complete_basis, eigenbasis, invariant_dimension, recursion_check
from .nodal import count_nodal_domains, ensemble_stats, euler_lower_bound
from .quat import SpherePoint, enumerate_norm
from .serialize import SCHEMA_VERSION

PRIMES = (3, 5, 7, 11, 13)


@dataclass(frozen=True)
class CriterionResult:
    number: int
    name: str
    passed: bool
    detail: str
    seconds: float

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return f"[{tag}] {self.number:2d} {self.name}: {self.detail} ({self.seconds:.1f}s)"


def _unit_rows(rng, n):
    P = rng.normal(size=(n, 3))
    return P / np.linalg.norm(P, axis=1, keepdims=True)


# ----------------------------------------------------------------- checks


def order_counting(max_m: int = 99):
    """Box count of Hurwitz quaternions by norm against enumeration and 24 sigma."""
    r = np.arange(-20, 21)               # doubled coordinates, sum of squares <= 4 * 99
    a = np.stack(np.meshgrid(r, r, r, r, indexing="ij"), -1).reshape(-1, 4)
    par = a % 2
    same = np.all(par == par[:, :1], axis=1)
    s = (a[same] ** 2).sum(axis=1)
    box = np.bincount(s[s % 4 == 0] // 4, minlength=max_m + 1)
    bad = []
    for m in range(1, max_m + 1, 2):
        want = 24 * int(divisor_sigma(m))
        if not (box[m] == want == len(enumerate_norm(m))):
            bad.append(m)
    ok = not bad
    return ok, f"odd m <= {max_m}, mismatches {bad}"


def hecke_algebra(max_l: int = 20, ms=(1, 3, 5, 7, 9, 15)):
    bad = []
    for l in range(0, max_l + 1, 2):
        for i, m in enumerate(ms):
            for n in ms[i:]:
                r = recursion_check(l, m, n)
                if not (r.holds and r.commutes):
                    bad.append((l, m, n))
    return not bad, f"even l <= {max_l}, failing (l, m, n) {bad}"


def dimension_formula(max_l: int = 120):
    bad, worst = [], 0.0
    for l in range(max_l + 1):
        d = invariant_dimension(l)
        worst = max(worst, abs(d - l / 6))
        if d != character_dimension(l) or abs(d - l / 6) > 1:
            bad.append(l)
    return not bad, f"l <= {max_l}, max |dim - l/6| = {worst:.3f}, failing {bad}"


def pretrace(max_l: int = 40, pairs: int = 100, seed: int = 0):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for l in range(0, max_l + 1, 2):
        X, Y = _unit_rows(rng, pairs), _unit_rows(rng, pairs)
        B = complete_basis(l)
        lhs = np.einsum("ni,ni->n", real_sph_harm(l, X) @ B, real_sph_harm(l, Y) @ B)
        rhs = (2 * l + 1) * legendre(l, np.clip(np.einsum("ni,ni->n", X, Y), -1, 1))
        worst = max(worst, float(np.abs(lhs - rhs).max()) / (2 * l + 1))
    return worst <= 1e-9, f"max error / (2l+1) = {worst:.2e}"


def spectral(configs: int = 20, seed: int = 1):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(configs):
        l = int(rng.choice(np.arange(4, 25, 2)))
        k = int(rng.integers(1, 4))
        support = tuple(sorted(rng.choice([3, 5, 7], size=k, replace=False).tolist()))
        a = rng.normal(size=k)
        alpha = AmplifierVector(support, a / np.linalg.norm(a))
        x = SpherePoint.from_float(rng.normal(size=3))
        y = SpherePoint.from_float(rng.normal(size=3))
        worst = max(worst, spectral_identity(l, alpha, x, y).discrepancy)
    return worst <= 1e-8, f"{configs} configurations, max relative gap {worst:.2e}"


def kernel_value(lo: int = 50, hi: int = 200):
    v = [float(legendre(l, math.cos(wavelength(l)))) for l in range(lo, hi + 1)]
    ok = all(-0.28 <= t <= -0.24 for t in v)
    return ok, f"range [{min(v):.4f}, {max(v):.4f}]"


def ramanujan_window(max_l: int = 60):
    worst_nu, worst_mult = 0.0, 0.0
    for l in range(4, max_l + 1, 2):
        for f in eigenbasis(l):
            f = f.with_eigenvalues([15])
            nu = f.normalized
            worst_nu = max(worst_nu, max(abs(nu[p]) for p in PRIMES))
            prod = nu[3] * nu[5]
            worst_mult = max(worst_mult, abs(prod - nu[15]) / max(1.0, abs(prod)))
    ok = worst_nu <= 2 + 1e-6 and worst_mult <= 1e-6
    return ok, f"max |nu(p)| = {worst_nu:.6f}, multiplicativity gap {worst_mult:.1e}"


def move_lemma(hmax: int = 25, max_m: int = 15):
    pts = points_up_to_height(hmax)
    checked, bad = 0, 0
    for m in range(1, max_m + 1, 2):
        rep = verify_move_bound(pts, m)
        checked += rep.checked
        bad += len(rep.violations)
    return bad == 0, f"{len(pts)} points, {checked} pairs, {bad} violations"


def stabilizer_lemma():
    c = stabilizer_count(SpherePoint.from_lattice(1, 0, 0), 3, 3).count
    best, arg = stabilizer_max(50)
    ok = c == 8 and best == STABILIZER_MAX_H50
    return ok, f"N(i, 9, 0) = {c}, max over h <= 50 = {best} at {arg}"


def fourier_parity(max_l: int = 40):
    worst = 0.0
    for l in range(0, max_l + 1, 2):
        odd = np.arange(-l, l + 1) % 2 == 1
        for f in eigenbasis(l):
            worst = max(worst, float(np.abs(restriction_fourier(f, E1)[odd]).max(initial=0)))
    return worst <= 1e-10, f"max odd |b_m| = {worst:.1e}"


def restriction_floor(max_l: int = 60):
    low = math.inf
    for l in range(4, max_l + 1, 2):
        for f in eigenbasis(l):
            for C in EQUATORS.values():
                low = min(low, float(np.linalg.norm(restriction_fourier(f, C))))
    ok = low >= RESTRICTION_L2_FLOOR >= 0.1
    return ok, f"min L2 = {low:.4f}, frozen floor {RESTRICTION_L2_FLOOR}"


def euler_consistency(max_l: int = 30):
    bad, n_fun, unresolved = [], 0, 0
    for l in range(0, max_l + 1, 2):
        for k, f in enumerate(eigenbasis(l)):
            nc = count_nodal_domains(f)
            N = restrict(f, E1).count
            n_fun += 1
            unresolved += nc.resolved is False
            if not euler_lower_bound(N, l) <= nc.domain_count <= (l + 1) ** 2:
                bad.append((l, k, N, nc.domain_count))
    return not bad, f"{n_fun} eigenfunctions, {unresolved} flagged unresolved, failing {bad}"


def oracle_zero_counts(max_l: int = 40):
    bad, n, degenerate = [], 0, 0
    for l in range(2, max_l + 1, 2):
        for k, f in enumerate(eigenbasis(l)):
            for name, C in EQUATORS.items():
                r = restrict(f, C)
                a, b = count_zeros(r), companion_zero_count(r)
                n += 1
                degenerate += bool(a.degenerate or b.degenerate)
                if a.count != b.count:
                    bad.append((l, k, name, a.count, b.count))
    return not bad, f"{n} restrictions, {degenerate} with exempt degenerate zeros, mismatches {bad}"


def growth_surrogate():
    T = total_zero_experiment(range(12, 49, 2))
    return T.slope >= 1.0, f"log-log slope {T.slope:.3f} over even l in [12, 48]"


def rwm_stability(samples: int = 50, seed: int = 0):
    a = ensemble_stats(30, samples, seed=seed)
    b = ensemble_stats(60, samples, seed=seed)
    gap = abs(a.mean - b.mean) / a.mean
    ok = gap <= 0.2 and a.courant_ok and b.courant_ok
    return ok, f"mean N/l^2: l=30 {a.mean:.4f}, l=60 {b.mean:.4f}, relative gap {gap:.3f}"


CRITERIA = {
    1: ("exact order counting", order_counting),
    2: ("exact Hecke algebra", hecke_algebra),
    3: ("dimension formula", dimension_formula),
    4: ("pre-trace identity", pretrace),
    5: ("spectral identity", spectral),
    6: ("kernel value at one wavelength", kernel_value),
    7: ("Ramanujan window and multiplicativity", ramanujan_window),
    8: ("move lemma", move_lemma),
    9: ("stabilizer lemma", stabilizer_lemma),
    10: ("Fourier parity", fourier_parity),
    11: ("restriction lower bound", restriction_floor),
    12: ("Euler consistency and Courant", euler_consistency),
    13: ("oracle zero counting", oracle_zero_counts),
    14: ("growth surrogate", growth_surrogate),
    15: ("random wave stability", rwm_stability),
}

# runtime caps in seconds, where one is stated
TIME_LIMITS = {1: 10, 2: 300, 8: 120, 14: 1800}


def run_criterion(number: int) -> CriterionResult:
    name, fn = CRITERIA[number]
    t0 = time.perf_counter()
    ok, detail = fn()
    dt = time.perf_counter() - t0
    limit = TIME_LIMITS.get(number)
    if limit is not None and dt > limit:
        ok, detail = False, f"{detail}; over the {limit}s budget"
    return CriterionResult(number, name, bool(ok), detail, dt)


def run_all(numbers=None, echo: bool = False) -> list[CriterionResult]:
    out = []
    for k in numbers or sorted(CRITERIA):
        res = run_criterion(k)
        if echo:
            print(res.line(), flush=True)
        out.append(res)
    return out


def write_manifests(results, out: Path) -> None:
    out.mkdir(parents=True, exist_ok=True)
    for r in results:
        doc = {"schema_version": SCHEMA_VERSION, "subcommand": "acceptance",
               "params": {"criterion": r.number}, "version": __version__,
               "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
               "detail": r.detail, "seconds": r.seconds, "checks": {str(r.number): r.passed}}
        (out / f"acceptance-{r.number:02d}.manifest.json").write_text(json.dumps(doc, indent=1) + "\n")


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="hecke-sphere-acceptance")
    ap.add_argument("numbers", nargs="*", type=int, help="criteria to run (default: all)")
    ap.add_argument("--out", help="also write one manifest per criterion here, for `report`")
    args = ap.parse_args(argv)
    res = run_all(args.numbers, echo=True)
    if args.out:
        write_manifests(res, Path(args.out))
    print(f"{sum(r.passed for r in res)}/{len(res)} criteria passed")
    return 0 if all(r.passed for r in res) else 1


if __name__ == "__main__":
    sys.exit(main())
