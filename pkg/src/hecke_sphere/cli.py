"""Command-line driver: one subcommand per experiment, JSON/CSV output plus a manifest.

Every subcommand writes ``<tag>.json`` or ``<tag>.csv`` and ``<tag>.manifest.json``
into ``--out``.  A manifest records the parameters, the tool version, a
timestamp and ``checks``: booleans keyed by acceptance-criterion number that
``report`` later aggregates into a pass/fail grid.

Exit codes: 0 success, 1 precondition error, 2 invariant failure, 64 usage.
"""

from __future__ import annotations

import argparse
import datetime as _dt
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .annihilator import (
    AmplifierVector,
    annihilation_run,
    sign_change_census,
    spectral_identity,
    total_zero_experiment,
    wavelength_partner,
)
from .diophantine import count_near, verify_move_bound
from .errors import InvariantFailure, PreconditionError
from .geodesic import E1, RESTRICTION_L2_FLOOR, companion_zero_count, count_zeros, great_circle, restrict
from .hecke import eigenbasis, hecke_matrix, invariant_dimension, recursion_check
from .nodal import DEFAULT_RHO, SphericalGrid, count_nodal_domains, ensemble_stats, euler_lower_bound
from .quat import SpherePoint, divisor_sum, enumerate_norm
from .serialize import SCHEMA_VERSION, csv_text, eigenbasis_to_dict, hecke_matrix_to_dict, jsonable

EX_USAGE = 64

CRITERION_NAMES = {
    1: "exact order counting",
    2: "exact Hecke algebra",
    3: "dimension formula",
    4: "pre-trace identity",
    5: "spectral identity",
    6: "kernel value at one wavelength",
    7: "Ramanujan window and multiplicativity",
    8: "move lemma",
    9: "stabilizer lemma",
    10: "Fourier parity",
    11: "restriction lower bound",
    12: "Euler consistency and Courant",
    13: "oracle zero counting",
    14: "growth surrogate",
    15: "random wave stability",
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EX_USAGE)


def _ints(text: str) -> list[int]:
    """'6' -> [6]; '3,5,7' -> [3, 5, 7]; '12:48:2' -> [12, 14, ..., 48]."""
    try:
        if ":" in text:
            parts = [int(t) for t in text.split(":")]
            lo, hi = parts[0], parts[1]
            step = parts[2] if len(parts) > 2 else 1
            return list(range(lo, hi + 1, step))
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer list: {text!r}") from None


def _triple(text: str) -> tuple[int, int, int]:
    v = _ints(text)
    if len(v) != 3:
        raise argparse.ArgumentTypeError(f"expected an integer triple, got {text!r}")
    return tuple(v)


def read_config(path: str) -> dict:
    """Plain key=value lines; '#' starts a comment; keys use flag names."""
    out = {}
    for n, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{n}: expected key=value")
        k, v = (s.strip() for s in line.split("=", 1))
        out[k.lstrip("-").replace("-", "_")] = v
    return out


# ------------------------------------------------------------ subcommands
#
# each returns (payload, csv_header, csv_rows, checks)


def _one(args, name="l"):
    v = getattr(args, name)
    if v is None or len(v) != 1:
        raise UsageError(f"--{name} takes a single value for {args.command}")
    return v[0]


def _point(args) -> SpherePoint:
    if args.x is None:
        raise UsageError(f"--x is required for {args.command}")
    return SpherePoint.from_lattice(*args.x)


def cmd_enumerate(args):
    m = _one(args, "m")
    els = enumerate_norm(m)
    rows = [g.doubled for g in els]
    payload = {"m": m, "count": len(els), "coordinates": "doubled", "elements": rows}
    return payload, ["a0", "a1", "a2", "a3"], rows, {1: len(els) == 24 * divisor_sum(m)}


def cmd_hecke_matrix(args):
    """Exact T_m for each m in --m; with several m the recursion is checked on every pair."""
    l, ms = _one(args), args.m
    if not ms:
        raise UsageError("--m is required for hecke-matrix")
    mats = [hecke_matrix(l, m) for m in ms]
    rows = [[H.m, i] + [f"{v.numerator}/{v.denominator}" for v in row]
            for H in mats for i, row in enumerate(H.exact.entries())]
    header = ["m", "row"] + [f"c{j}" for j in range(2 * l + 1)]
    checks = {}
    if len(ms) > 1:
        res = [recursion_check(l, m, n) for i, m in enumerate(ms) for n in ms[i:]]
        checks[2] = all(r.holds and r.commutes for r in res)
    payload = {"l": l, "matrices": [hecke_matrix_to_dict(H) for H in mats]}
    return payload, header, rows, checks


def cmd_eigenbasis(args):
    l = _one(args)
    B = eigenbasis(l)
    tol = args.tol if args.tol is not None else 1e-6
    rows = [[k, m, lam, f.normalized.get(m, ""), f.residuals.get(m, "")]
            for k, f in enumerate(B) for m, lam in sorted(f.eigenvalues.items())]
    window = all(abs(f.normalized[p]) <= 2 + tol for f in B for p in (3, 5, 7, 11, 13))
    mult = all(abs(f.normalized[3] * f.normalized[5] - f.normalized[15])
               <= tol * max(1.0, abs(f.normalized[3] * f.normalized[5])) for f in B)
    checks = {3: len(B) == invariant_dimension(l)}
    if l >= 4:
        checks[7] = window and mult
    return eigenbasis_to_dict(l, B), ["index", "m", "eigenvalue", "nu", "residual"], rows, checks


def _circle(args):
    return great_circle(SpherePoint.from_lattice(*(args.x or (1, 0, 0))))


def cmd_restrict(args):
    l, C = _one(args), _circle(args)
    out, rows = [], []
    for k, f in enumerate(eigenbasis(l)):
        r = restrict(f, C)
        out.append({"index": k, "L2": r.L2, "fourier": r.fourier})
        rows += [[k, m, complex(b).real, complex(b).imag] for m, b in zip(range(-l, l + 1), r.fourier)]
    checks = {11: all(o["L2"] >= RESTRICTION_L2_FLOOR for o in out)} if l >= 4 else {}
    if C is E1:
        tol = args.tol if args.tol is not None else 1e-10
        checks[10] = all(abs(o["fourier"][m + l]) <= tol for o in out for m in range(-l, l + 1) if m % 2)
    payload = {"l": l, "axis": C.axis, "restrictions": out}
    return payload, ["index", "m", "re", "im"], rows, checks


def cmd_zeros(args):
    l, C = _one(args), _circle(args)
    out = []
    for k, f in enumerate(eigenbasis(l)):
        r = restrict(f, C)
        a, b = count_zeros(r), companion_zero_count(r)
        out.append([k, a.count, b.count, len(a.degenerate) + len(b.degenerate)])
    payload = {"l": l, "axis": C.axis,
               "counts": [dict(zip(("index", "bisection", "companion", "degenerate"), r)) for r in out]}
    return payload, ["index", "bisection", "companion", "degenerate"], out, {13: all(r[1] == r[2] for r in out)}


def cmd_nodal(args):
    l = _one(args)
    rho = args.grid_res or DEFAULT_RHO
    grid = SphericalGrid.for_degree(l, rho)
    rows = []
    for k, f in enumerate(eigenbasis(l)):
        nc = count_nodal_domains(f, grid)
        N = restrict(f, E1).count
        rows.append([k, nc.domain_count, N, euler_lower_bound(N, l), nc.resolved])
    ok = all(r[3] <= r[1] <= (l + 1) ** 2 for r in rows)
    header = ["index", "domains", "equator_zeros", "euler_bound", "resolved"]
    return {"l": l, "grid_res": rho, "rows": [dict(zip(header, r)) for r in rows]}, header, rows, {12: ok}


def cmd_rwm(args):
    l = _one(args)
    n = args.samples
    s = ensemble_stats(l, n, seed=args.seed, rho=args.grid_res or DEFAULT_RHO)
    rows = [[i, int(c), c / l ** 2] for i, c in enumerate(s.counts)]
    return jsonable(s), ["sample", "domains", "ratio"], rows, {}


def cmd_diophantine(args):
    x = _point(args)
    m = _one(args, "m")
    delta = args.tol if args.tol is not None else 0.0
    rep = count_near(x, m, delta)
    mv = verify_move_bound(x, m)
    payload = {"x": x, "m": m, "delta": delta, "count": rep.count, "fixing": rep.fixing,
               "antipodal": rep.antipodal, "witnesses": rep.witnesses,
               "move_checked": mv.checked, "move_violations": mv.violations}
    rows = [g.doubled for g in rep.witnesses]
    return payload, ["a0", "a1", "a2", "a3"], rows, {8: not mv.violations}


def _alpha(args):
    ps = args.primes or [3, 5, 7]
    return AmplifierVector(tuple(ps), np.full(len(ps), 1 / math.sqrt(len(ps))))


def cmd_spectral(args):
    l, x = _one(args), _point(args)
    ev = spectral_identity(l, _alpha(args), x, wavelength_partner(x, l))
    tol = args.tol if args.tol is not None else 1e-8
    rows = [[n, m, d, v] for (n, m, d), v in sorted(ev.terms.items())]
    payload = {"l": l, "x": x, "y": ev.y, "alpha": dict(ev.alpha.items()), "lhs": ev.lhs,
               "rhs": ev.rhs, "discrepancy": ev.discrepancy, "terms": ev.terms}
    return payload, ["n", "m", "d", "term"], rows, {5: ev.discrepancy <= tol}


def cmd_annihilate(args):
    l, x = _one(args), _point(args)
    run = annihilation_run(l, x, window=args.primes)
    tol = args.tol if args.tol is not None else 1e-10
    payload = {"l": l, "x": x, "y": run.census.y, "alpha": dict(run.alpha.items()),
               "sign_changing": run.census.sign_changing, "non_negative": run.census.non_negative,
               "ambiguous": run.census.ambiguous, "max_constrained_amplitude": run.max_constrained_amplitude,
               "lhs": run.full.lhs, "rhs": run.full.rhs, "restricted_lhs": run.restricted_lhs}
    rows = [[k, v] for k, v in enumerate(run.full.amplitudes)]
    return payload, ["index", "amplitude"], rows, {5: run.full.discrepancy <= 1e-8
                                                   and run.max_constrained_amplitude <= tol}


def cmd_census(args):
    l, x = _one(args), _point(args)
    c = sign_change_census(l, x)
    rows = ([[k, "sign_changing"] for k in c.sign_changing] + [[k, "non_negative"] for k in c.non_negative]
            + [[k, "ambiguous"] for k in c.ambiguous])
    return jsonable(c), ["index", "class"], sorted(rows), {}


def cmd_total_zeros(args):
    ls = args.l or list(range(12, 49, 2))
    T = total_zero_experiment(ls, kappa=args.kappa if args.kappa is not None else 0.05)
    rows = [[r.l, r.basis_size, r.total, r.min_count, r.interval_hits, r.hits_certified] for r in T.rows]
    header = ["l", "basis_size", "total", "min_count", "interval_hits", "hits_certified"]
    return jsonable(T), header, rows, {14: T.slope >= 1.0} if len(ls) > 1 else {}


COMMANDS = {
    "enumerate": cmd_enumerate,
    "hecke-matrix": cmd_hecke_matrix,
    "eigenbasis": cmd_eigenbasis,
    "restrict": cmd_restrict,
    "zeros": cmd_zeros,
    "nodal": cmd_nodal,
    "rwm": cmd_rwm,
    "diophantine": cmd_diophantine,
    "spectral": cmd_spectral,
    "annihilate": cmd_annihilate,
    "census": cmd_census,
    "total-zeros": cmd_total_zeros,
}


# ------------------------------------------------------------ report


def _rwm_checks(manifests) -> dict:
    """Criterion 15 needs two rwm runs: l = 30 and l = 60 with >= 50 samples each."""
    means = {}
    for man in manifests:
        p = man["params"]
        if man["subcommand"] == "rwm" and p.get("samples", 0) >= 50 and "mean" in man.get("summary", {}):
            means[p["l"][0]] = man["summary"]
    if 30 not in means or 60 not in means:
        return {}
    a, b = means[30], means[60]
    ok = abs(a["mean"] - b["mean"]) <= 0.2 * a["mean"] and a["courant_ok"] and b["courant_ok"]
    return {15: ok}


def report(run_dir: Path, out: Path | None = None) -> int:
    run_dir = Path(run_dir)
    paths = sorted(run_dir.glob("*.manifest.json")) if run_dir.is_dir() else []
    if not paths:
        print(f"error: no manifests in {run_dir}", file=sys.stderr)
        return 1
    manifests = []
    for p in paths:
        try:
            man = json.loads(p.read_text())
            man["subcommand"], man["checks"]
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            print(f"warning: skipping {p.name}: {exc}", file=sys.stderr)
            continue
        manifests.append(man)
    grid = {k: [] for k in CRITERION_NAMES}
    for man in manifests:
        for k, v in man["checks"].items():
            grid.setdefault(int(k), []).append(bool(v))
    for k, v in _rwm_checks(manifests).items():
        grid[k].append(v)
    rows = []
    for k in sorted(grid):
        v = grid[k]
        status = "MISSING" if not v else ("PASS" if all(v) else "FAIL")
        rows.append([k, CRITERION_NAMES.get(k, ""), status, len(v)])
    text = csv_text(["criterion", "name", "status", "runs"], rows)
    dest = Path(out) if out else run_dir
    dest.mkdir(parents=True, exist_ok=True)
    (dest / "report.csv").write_text(text, newline="")
    for k, name, status, n in rows:
        print(f"{k:>3}  {status:<8} {name} ({n} runs)")
    missing = [r[0] for r in rows if r[2] == "MISSING"]
    failed = [r[0] for r in rows if r[2] == "FAIL"]
    if missing:
        print(f"criteria without input: {missing}", file=sys.stderr)
    if failed:
        return 2
    return 1 if missing else 0


# ------------------------------------------------------------ driver


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="hecke-sphere", description="Hecke operators on the sphere: experiment driver")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--l", type=_ints, help="degree, or a list a,b,c / range lo:hi:step")
        p.add_argument("--m", type=_ints, help="odd norm")
        p.add_argument("--primes", type=_ints, help="amplifier support, e.g. 3,5,7")
        p.add_argument("--x", type=_triple, help="integer triple u,v,w")
        p.add_argument("--kappa", type=float)
        p.add_argument("--grid-res", type=int, help="grid cells per unit degree (rho)")
        p.add_argument("--samples", type=int, default=50)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--format", choices=("json", "csv"), default="json")
        p.add_argument("--out", default="hecke-runs")
        p.add_argument("--tol", type=float)
        p.add_argument("--config", help="key=value file; flags given on the command line win")
    p = sub.add_parser("report")
    p.add_argument("run_dir")
    p.add_argument("--out")
    return ap


def _tag(args) -> str:
    parts = [args.command]
    for k in ("l", "m", "primes", "x"):
        v = getattr(args, k)
        if v:
            parts.append(k + "-".join(str(t) for t in v))
    if args.command == "rwm":
        parts.append(f"n{args.samples}-s{args.seed}")
    return "_".join(parts)


def _apply_config(args, argv):
    cfg = read_config(args.config)
    given = {a.split("=", 1)[0].lstrip("-").replace("-", "_") for a in argv if a.startswith("--")}
    converters = {"l": _ints, "m": _ints, "primes": _ints, "x": _triple, "kappa": float,
                  "grid_res": int, "samples": int, "seed": int, "tol": float, "format": str, "out": str}
    for k, v in cfg.items():
        if k not in converters:
            raise UsageError(f"unknown config key {k!r}")
        if k not in given:
            setattr(args, k, converters[k](v))


def run(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    ap = build_parser()
    args = ap.parse_args(argv)
    if args.command == "report":
        return report(Path(args.run_dir), args.out)
    try:
        if args.config:
            _apply_config(args, argv)
        payload, header, rows, checks = COMMANDS[args.command](args)
    except (UsageError, argparse.ArgumentTypeError) as exc:
        ap.print_usage(sys.stderr)
        print(f"error: {exc}", file=sys.stderr)
        return EX_USAGE
    except PreconditionError as exc:
        print(f"precondition error ({type(exc).__name__}): {exc}", file=sys.stderr)
        return 1
    except InvariantFailure as exc:
        print(f"invariant failure ({type(exc).__name__}): {exc}", file=sys.stderr)
        return 2
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    tag = _tag(args)
    if args.format == "json":
        doc = {"schema_version": SCHEMA_VERSION, "subcommand": args.command, **jsonable(payload)}
        data = out / f"{tag}.json"
        data.write_text(json.dumps(doc, indent=1, sort_keys=True) + "\n")
    else:
        data = out / f"{tag}.csv"
        data.write_text(csv_text(header, rows), newline="")
    params = {k: getattr(args, k) for k in ("l", "m", "primes", "x", "kappa", "grid_res", "samples", "tol")}
    manifest = {
        "schema_version": SCHEMA_VERSION,
        "subcommand": args.command,
        "params": jsonable(params),
        "seed": args.seed,
        "format": args.format,
        "version": __version__,
        "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
        "outputs": [data.name],
        "checks": {str(k): bool(v) for k, v in checks.items()},
    }
    if args.command == "rwm":
        manifest["summary"] = {"mean": payload["mean"], "courant_ok": payload["courant_ok"]}
    (out / f"{tag}.manifest.json").write_text(json.dumps(manifest, indent=1, sort_keys=True) + "\n")
    failed = [k for k, v in checks.items() if not v]
    print(f"wrote {data}")
    if failed:
        names = ", ".join(CRITERION_NAMES[k] for k in failed)
        print(f"invariant failure: {names}", file=sys.stderr)
        return 2
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
