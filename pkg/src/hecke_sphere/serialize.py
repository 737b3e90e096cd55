"""JSON/CSV encodings for matrices, eigenbases and experiment reports.

Exact matrices are stored entrywise as reduced ``"p/q"`` decimal strings so
they round-trip without loss.  Every top-level document carries
``schema_version``.
"""

from __future__ import annotations

import csv
import dataclasses
import io
import math
from fractions import Fraction

import numpy as np

from .exact import ExactMatrix
from .hecke import HeckeEigenfunction, HeckeMatrix
from .quat import HurwitzQuaternion, SpherePoint

SCHEMA_VERSION = 1


def jsonable(obj):
    """Plain JSON value for reports built from dataclasses, arrays and points."""
    if isinstance(obj, HurwitzQuaternion):
        return list(obj.doubled)
    if isinstance(obj, SpherePoint):
        d = {"coords": list(obj.coords)}
        if obj.exact:
            d["lattice"] = list(obj.lattice)
            d["height"] = obj.height
        return d
    if isinstance(obj, HeckeMatrix):
        return hecke_matrix_to_dict(obj)
    if isinstance(obj, HeckeEigenfunction):
        return eigenfunction_to_dict(obj)
    if isinstance(obj, ExactMatrix):
        return exact_to_dict(obj)
    if isinstance(obj, Fraction):
        return f"{obj.numerator}/{obj.denominator}"
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)
                if not f.name.startswith("_")}
    if isinstance(obj, dict):
        return {_key(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        if np.iscomplexobj(obj):
            return [[float(v.real), float(v.imag)] for v in obj.ravel()]
        return jsonable(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def _key(k):
    if isinstance(k, tuple):
        return ",".join(str(v) for v in k)
    return str(k)


def exact_to_dict(M: ExactMatrix) -> dict:
    rows = []
    for row in M.entries():
        rows.append([f"{v.numerator}/{v.denominator}" for v in row])
    return {"shape": list(M.shape), "entries": rows}


def exact_from_dict(d: dict) -> ExactMatrix:
    return ExactMatrix.from_fractions([[Fraction(v) for v in row] for row in d["entries"]])


def hecke_matrix_to_dict(H: HeckeMatrix) -> dict:
    return {"schema_version": SCHEMA_VERSION, "kind": "hecke_matrix", "l": H.l, "m": H.m,
            "exact": exact_to_dict(H.exact)}


def hecke_matrix_from_dict(d: dict) -> HeckeMatrix:
    return HeckeMatrix(int(d["l"]), int(d["m"]), exact_from_dict(d["exact"]))


def eigenfunction_to_dict(f: HeckeEigenfunction) -> dict:
    return {"l": f.l, "coeffs": [float(v) for v in f.coeffs],
            "eigenvalues": {str(m): float(v) for m, v in sorted(f.eigenvalues.items())},
            "normalized": {str(m): float(v) for m, v in sorted(f.normalized.items())},
            "residuals": {str(m): float(v) for m, v in sorted(f.residuals.items())}}


def eigenbasis_to_dict(l: int, basis) -> dict:
    return {"schema_version": SCHEMA_VERSION, "kind": "eigenbasis", "l": l,
            "functions": [eigenfunction_to_dict(f) for f in basis]}


def eigenbasis_from_dict(d: dict) -> list[HeckeEigenfunction]:
    out = []
    for e in d["functions"]:
        out.append(HeckeEigenfunction(
            int(e["l"]), np.array(e["coeffs"], dtype=float),
            {int(m): float(v) for m, v in e["eigenvalues"].items()},
            {int(m): float(v) for m, v in e.get("residuals", {}).items()}))
    return out


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(header)
    for r in rows:
        w.writerow([jsonable(v) if not isinstance(v, (str, int, float)) else v for v in r])
    return buf.getvalue()
