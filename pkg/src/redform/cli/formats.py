"""JSON containers for systems, operators and certificates.

Matrices are stored as arrays of expression strings.  Output is printed in
expanded canonical form (``num/den`` with monic denominator), so writing a
file and reading it back is exact.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from ..diffsys import LOWER, UPPER, DiffSystem, GaugeMatrix, SystemError_
from ..exactfield import RatFunc
from .expr import ExprError, parse_expression, to_text

CERT_KIND = "redform-certificate"


class FormatError(ValueError):
    """Malformed input file (maps to exit code 2)."""


def resolve_path(name: str) -> Path:
    """``name`` itself if it exists, else a bundled fixture of that name."""
    p = Path(name)
    if p.exists():
        return p
    stem = p.name if p.suffix == ".json" else p.name + ".json"
    bundled = resources.files("redform") / "fixtures" / stem
    if bundled.is_file():
        return Path(str(bundled))
    raise FormatError(f"{name}: no such file or bundled fixture")


def read_json(name: str) -> dict:
    path = resolve_path(name)
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    if not isinstance(data, dict):
        raise FormatError(f"{path}: top level must be an object")
    return data


def parse_matrix(rows, variable: str, what: str = "matrix") -> list[list[RatFunc]]:
    if not isinstance(rows, list) or not rows or not all(isinstance(r, list) for r in rows):
        raise FormatError(f"{what} must be a non-empty array of rows")
    out = []
    for i, row in enumerate(rows):
        cur = []
        for j, s in enumerate(row):
            if not isinstance(s, (str, int)):
                raise FormatError(f"{what}[{i + 1},{j + 1}]: expected an expression string")
            try:
                cur.append(parse_expression(str(s), variable))
            except ExprError as exc:
                raise FormatError(f"{what}[{i + 1},{j + 1}]: {exc}") from None
        out.append(cur)
    return out


def print_matrix(M, variable: str = "x") -> list[list[str]]:
    return [[to_text(RatFunc.coerce(v), variable) for v in row] for row in M]


@dataclass
class SystemFile:
    variable: str
    orientation: str
    blocks: tuple
    matrix: list
    diag_reduced: bool = False
    name: str = ""
    integrals: tuple = ()
    asserted_diag_dim: int | None = None
    adapted_basis: dict | None = None
    extra: dict = field(default_factory=dict)

    def system(self, assume_diag_reduced: bool = False) -> DiffSystem:
        try:
            return DiffSystem(
                self.matrix,
                self.blocks,
                self.orientation,
                self.diag_reduced or assume_diag_reduced,
                self.integrals,
            )
        except SystemError_ as exc:
            raise FormatError(str(exc)) from None

    def to_json(self) -> dict:
        out = {
            "variable": self.variable,
            "orientation": self.orientation,
            "blocks": list(self.blocks),
            "diag_reduced": self.diag_reduced,
            "matrix": print_matrix(self.matrix, self.variable),
        }
        if self.name:
            out["name"] = self.name
        if self.integrals:
            out["integrals"] = [list(p) for p in self.integrals]
        if self.asserted_diag_dim is not None:
            out["asserted_diag_dim"] = self.asserted_diag_dim
        if self.adapted_basis is not None:
            out["adapted_basis"] = self.adapted_basis
        return out


def load_system(name: str) -> SystemFile:
    data = read_json(name)
    variable = data.get("variable", "x")
    if not isinstance(variable, str) or not variable.isidentifier():
        raise FormatError(f"variable must be an identifier, got {variable!r}")
    orientation = data.get("orientation", LOWER)
    if orientation not in (LOWER, UPPER):
        raise FormatError(f"orientation must be 'lower' or 'upper', got {orientation!r}")
    if "matrix" not in data:
        raise FormatError("missing field 'matrix'")
    M = parse_matrix(data["matrix"], variable)
    n = len(M)
    if any(len(r) != n for r in M):
        raise FormatError(f"matrix must be square, got {n} rows of lengths {[len(r) for r in M]}")
    blocks = data.get("blocks", [n])
    if not isinstance(blocks, list) or not all(isinstance(b, int) and b > 0 for b in blocks):
        raise FormatError("blocks must be an array of positive integers")
    if sum(blocks) != n:
        raise FormatError(f"blocks {blocks} do not sum to the matrix dimension {n}")
    diag = data.get("diag_reduced", False)
    if not isinstance(diag, bool):
        raise FormatError("diag_reduced must be true or false")
    sf = SystemFile(
        variable,
        orientation,
        tuple(blocks),
        M,
        diag,
        data.get("name", ""),
        tuple(tuple(p) for p in data.get("integrals", [])),
        data.get("asserted_diag_dim"),
        data.get("adapted_basis"),
    )
    sf.system()  # validates block-triangular shape
    return sf


@dataclass
class OperatorFile:
    """``sum coeffs[i] y^(i) = rhs`` with coefficients listed from order 0 up."""

    variable: str
    coeffs: list
    rhs: RatFunc
    name: str = ""


def load_operator(name: str) -> OperatorFile:
    data = read_json(name)
    variable = data.get("variable", "x")
    if "operator" not in data:
        raise FormatError("missing field 'operator' (coefficients from order 0 upwards)")
    coeffs = parse_matrix([data["operator"]], variable, "operator")[0]
    if not coeffs or not coeffs[-1]:
        raise FormatError("leading coefficient of the operator must be nonzero")
    rhs = parse_matrix([[data.get("rhs", "0")]], variable, "rhs")[0][0]
    return OperatorFile(variable, coeffs, rhs, data.get("name", ""))


# ---------------------------------------------------------------------------
# certificates


@dataclass
class Certificate:
    variable: str
    orientation: str
    blocks: tuple
    A: list
    P: list
    A_red: list

    def to_json(self) -> dict:
        v = self.variable
        return {
            "kind": CERT_KIND,
            "variable": v,
            "orientation": self.orientation,
            "blocks": list(self.blocks),
            "A": print_matrix(self.A, v),
            "P": print_matrix(self.P, v),
            "A_red": print_matrix(self.A_red, v),
        }

    def systems(self) -> tuple[GaugeMatrix, DiffSystem, DiffSystem]:
        try:
            P = GaugeMatrix(self.P)
        except (ValueError, ZeroDivisionError) as exc:
            raise FormatError(f"gauge matrix is not invertible: {exc}") from None
        src = DiffSystem(self.A, None, self.orientation)
        dst = DiffSystem(self.A_red, None, self.orientation)
        return P, src, dst


def make_certificate(report, variable: str = "x") -> Certificate:
    sys = report.original
    return Certificate(variable, sys.orientation, sys.blocks, sys.A, report.gauge.P, report.reduced.A)


def load_certificate(name: str) -> Certificate:
    data = read_json(name)
    if data.get("kind") != CERT_KIND:
        raise FormatError(f"not a certificate (kind must be {CERT_KIND!r})")
    v = data.get("variable", "x")
    mats = {}
    for key in ("A", "P", "A_red"):
        if key not in data:
            raise FormatError(f"certificate is missing {key!r}")
        mats[key] = parse_matrix(data[key], v, key)
    n = len(mats["A"])
    for key, M in mats.items():
        if len(M) != n or any(len(r) != n for r in M):
            raise FormatError(f"{key} must be {n}x{n}")
    return Certificate(v, data.get("orientation", LOWER), tuple(data.get("blocks", [n])), **mats)


# ---------------------------------------------------------------------------
# deterministic output


def _is_leaf_list(v) -> bool:
    return isinstance(v, list) and not any(isinstance(x, (list, dict)) for x in v)


def dumps(obj, indent: int = 2) -> str:
    """Sorted-key JSON; arrays of scalars stay on one line (matrix rows read as rows)."""

    def emit(v, level: int) -> str:
        pad = " " * (indent * (level + 1))
        end = " " * (indent * level)
        if isinstance(v, dict):
            if not v:
                return "{}"
            items = [f"{pad}{json.dumps(str(k))}: {emit(v[k], level + 1)}" for k in sorted(v)]
            return "{\n" + ",\n".join(items) + "\n" + end + "}"
        if isinstance(v, (list, tuple)):
            v = list(v)
            if _is_leaf_list(v):
                return "[" + ", ".join(json.dumps(x) for x in v) + "]"
            return "[\n" + ",\n".join(pad + emit(x, level + 1) for x in v) + "\n" + end + "]"
        return json.dumps(v)

    return emit(obj, 0) + "\n"
