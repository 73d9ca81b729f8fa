"""Command-line driver: ``redform <subcommand> <file> [options]``.

Exit codes: 0 success, 2 parse or validation error, 3 unsupported input,
4 diagonal not asserted reduced, 5 certificate failure.
"""

from __future__ import annotations

import argparse
import sys

from ..adjoint import adjoint_action, diagonal_psi_components, flag_filtration, split_blocks
from ..diffsys import SystemError_, check_gauge_identity, series_gauge_check, to_lower
from ..independence import independence_report
from ..liealgebra import derived_series, lie_dim, wei_norman
from ..ratsolve import ParamAffine, ParamRegistry, UnsupportedInput, scalar_rational_solutions
from ..reducer import (
    AssumptionNotAsserted,
    CertificateFailure,
    ReductionOptions,
    check_rational_poles,
    flag_for_system,
    irreducible_action,
    reduce_system,
)
from .expr import ExprError, parse_rational, to_text
from .formats import (
    FormatError,
    dumps,
    load_certificate,
    load_operator,
    load_system,
    make_certificate,
    print_matrix,
)

EXIT_OK, EXIT_PARSE, EXIT_UNSUPPORTED, EXIT_ASSUMPTION, EXIT_CERT = 0, 2, 3, 4, 5


def _emit(args, text: str, payload: dict, out):
    """Text to ``out`` unless ``--json`` went to stdout; JSON to the requested target."""
    if args.json == "-":
        out.write(dumps(payload))
        return
    out.write(text.rstrip("\n") + "\n")
    if args.json:
        with open(args.json, "w") as fh:
            fh.write(dumps(payload))


def _fmt_matrix(M, var: str, indent: str = "  ") -> str:
    rows = print_matrix(M, var)
    width = max((len(s) for r in rows for s in r), default=1)
    return "\n".join(indent + "[ " + "  ".join(s.rjust(width) for s in r) + " ]" for r in rows)


def _fmt_affine(p: ParamAffine, registry: ParamRegistry, var: str) -> str:
    parts = []
    if p.constant or not p.terms:
        parts.append(to_text(p.constant, var))
    for pid in sorted(p.terms):
        c = p.terms[pid]
        name = registry.label(pid)
        parts.append(name if c == 1 else f"({to_text(c, var)})*{name}")
    return " + ".join(parts)


def _free_values(items) -> dict:
    out = {}
    for item in items or ():
        label, sep, value = item.partition("=")
        if not sep:
            raise FormatError(f"--free expects LABEL=VALUE, got {item!r}")
        out[label.strip()] = parse_rational(value)
    return out


# ---------------------------------------------------------------------------
# subcommands


def cmd_reduce(args, out) -> int:
    sf = load_system(args.file)
    system = sf.system(args.assume_diag_reduced)
    if not system.diag_reduced_assumed:
        raise AssumptionNotAsserted(
            "the diagonal blocks must be asserted to be in reduced form: pass "
            "--assume-diag-reduced or set \"diag_reduced\": true"
        )
    check_rational_poles(system)
    flag = None
    if sf.adapted_basis is not None and len(system.blocks) == 2 and not args.auto_flag:
        flag = flag_for_system(system, sf.adapted_basis)
    rep = reduce_system(system, ReductionOptions(args.branch, _free_values(args.free), flag))
    if not check_gauge_identity(rep.gauge, rep.original, rep.reduced):
        raise CertificateFailure("computed gauge does not satisfy P[A] = A_red")
    series_ok = series_gauge_check(rep.gauge, rep.original, rep.reduced, args.order)
    if not series_ok:
        raise CertificateFailure(f"series cross-check failed at order {args.order}")
    asserted = args.asserted_diag_dim if args.asserted_diag_dim is not None else sf.asserted_diag_dim
    ind = independence_report(rep, asserted)
    var = sf.variable
    cert = make_certificate(rep, var)
    if args.cert:
        with open(args.cert, "w") as fh:
            fh.write(dumps(cert.to_json()))

    payload = {
        "name": sf.name,
        "verdict": rep.verdict,
        "method": rep.method,
        "split": list(rep.split),
        "lie_dim_before": rep.lie_dim_before,
        "lie_dim_after": rep.lie_dim_after,
        "diag_lie_dim": rep.diag_lie_dim,
        "envelope_certified": rep.envelope_certified,
        "diag_reduced_assumed": rep.diag_reduced_assumed,
        "gauge": print_matrix(rep.gauge.P, var),
        "reduced": print_matrix(rep.reduced.A, var),
        "orientation": rep.reduced.orientation,
        "gauge_identity": True,
        "series_check": {"order": args.order, "ok": series_ok},
        "constraints": [{"level": lv, "equations": eqs} for lv, eqs in rep.constraints_log],
        "removed": list(rep.removed),
        "obstructed": list(rep.obstructed),
        "branch_choices": list(rep.branch_choices),
        "coefficients": dict(rep.coefficients),
        "free_params": list(rep.free_params),
        "steps": list(rep.steps),
        "residual_in_diag_span": rep.residual_in_diag_span,
        "independence": ind.to_dict(),
    }

    lines = []
    if sf.name:
        lines.append(f"system: {sf.name}")
    lines.append(f"verdict: {rep.verdict} (method: {rep.method}, split {rep.split[0]}+{rep.split[1]})")
    lines.append(f"lie_dim_before: {rep.lie_dim_before}")
    lines.append(f"lie_dim_after: {rep.lie_dim_after}")
    for lv, eqs in rep.constraints_log:
        lines.append(f"constraints {lv}: " + (", ".join(eqs) if eqs else "none"))
    if rep.removed:
        lines.append("removed: " + ", ".join(rep.removed))
    if rep.obstructed:
        lines.append("obstructed: " + ", ".join(rep.obstructed))
    for b in rep.branch_choices:
        lines.append(f"branch at {b['level']}: kept {b['kept']}, alternative {b['alternative']}")
    if rep.coefficients:
        lines.append("gauge coefficients: " + ", ".join(f"{k}: {v}" for k, v in rep.coefficients.items()))
    if rep.free_params:
        lines.append("free constants (set to 0 unless given): " + ", ".join(rep.free_params))
    lines.append("gauge P:")
    lines.append(_fmt_matrix(rep.gauge.P, var))
    lines.append("reduced matrix:")
    lines.append(_fmt_matrix(rep.reduced.A, var))
    lines.append(f"check P[A] = A_red: ok; series check to order {args.order}: ok")
    lines.append(ind.text())
    _emit(args, "\n".join(lines), payload, out)
    return EXIT_OK


def cmd_lie_dim(args, out) -> int:
    sf = load_system(args.file)
    system = sf.system()
    check_rational_poles(system)
    d, basis, decomp = lie_dim(system)
    series = derived_series(basis.basis, system.n)
    solvable = series[-1] == 0
    depth = len(series) - 1 if solvable else None
    var = sf.variable
    payload = {
        "name": sf.name,
        "lie_dim": d,
        "derived_series": series,
        "solvable": solvable,
        "derived_length": depth,
        "envelope_certified": basis.envelope_certified,
        "wei_norman_functions": [to_text(f, var) for f in decomp.funcs],
    }
    lines = [f"lie_dim: {d}", "derived series: " + ", ".join(map(str, series))]
    lines.append(f"solvable of depth {depth}" if solvable else "not solvable")
    lines.append("Wei-Norman functions: " + ", ".join(payload["wei_norman_functions"]))
    lines.append(
        "envelope certified (scalar plus nilpotent): " + ("yes" if basis.envelope_certified else "no")
    )
    _emit(args, "\n".join(lines), payload, out)
    return EXIT_OK


def cmd_adjoint(args, out) -> int:
    sf = load_system(args.file)
    system = sf.system()
    check_rational_poles(system)
    if args.split is not None:
        system = system.reblocked((args.split, system.n - args.split))
    elif len(system.blocks) != 2:
        raise FormatError(f"adjoint needs two blocks or --split, got blocks {list(system.blocks)}")
    low = to_lower(system)
    n1 = low.blocks[0]
    A1, A2, _ = split_blocks(low.A, n1)
    action = adjoint_action(A1, A2)
    n = low.n
    decomp = wei_norman(low.diagonal_part())
    var = sf.variable
    payload = {"blocks": [n1, n - n1], "vec": "row-stacking", "psi": print_matrix(action.psi, var)}
    lines = [f"psi on the {n - n1}x{n1} coupling block (row-stacking vec), {action.N}x{action.N}:"]
    lines.append(_fmt_matrix(action.psi, var))
    try:
        if sf.adapted_basis is not None and args.split is None:
            flag = flag_for_system(system, sf.adapted_basis)
        else:
            flag = flag_filtration(action, decomp)
    except UnsupportedInput as exc:
        irreducible = irreducible_action(diagonal_psi_components(decomp, n1), action.N)
        if not irreducible:
            raise
        payload["flag"] = None
        payload["irreducible"] = True
        lines.append(f"flag: none ({exc}); the action is irreducible")
        _emit(args, "\n".join(lines), payload, out)
        return EXIT_OK
    levels = []
    for s in flag.summands:
        for lv in s.levels:
            levels.append(
                {
                    "summand": s.name,
                    "level": lv.name,
                    "directions": [
                        {"label": d.label, "param": d.param, "block": print_matrix(flag.block(d), var)}
                        for d in lv.directions
                    ],
                }
            )
            lines.append(f"{s.name} {lv.name}: " + ", ".join(d.label for d in lv.directions))
    payload["flag"] = levels
    payload["scalar_part"] = to_text(flag.scalar, var)
    if flag.adapted_psi:
        payload["adapted_psi"] = print_matrix(flag.adapted_psi, var)
        lines.append("psi on the adapted basis:")
        lines.append(_fmt_matrix(flag.adapted_psi, var))
    _emit(args, "\n".join(lines), payload, out)
    return EXIT_OK


def cmd_ratsolve(args, out) -> int:
    op = load_operator(args.file)
    registry = ParamRegistry()
    space = scalar_rational_solutions(op.coeffs, ParamAffine(op.rhs), registry, label="c")
    var = op.variable
    if space.empty:
        payload = {"name": op.name, "solutions": None}
        text = "no rational solution"
    else:
        sol = _fmt_affine(space.particular[0], registry, var)
        params = sorted(registry.label(p) for p in space.params())
        payload = {"name": op.name, "solutions": sol, "parameters": params}
        text = f"y = {sol}" + (f"  (free: {', '.join(params)})" if params else "")
    _emit(args, text, payload, out)
    return EXIT_OK


def cmd_check(args, out) -> int:
    cert = load_certificate(args.file)
    try:
        P, src, dst = cert.systems()
    except (FormatError, SystemError_) as exc:
        raise CertificateFailure(str(exc)) from None
    if not check_gauge_identity(P, src, dst):
        raise CertificateFailure("P[A] != A_red: certificate does not verify")
    _emit(args, "certificate verified: P^-1 A P - P^-1 P' = A_red", {"verified": True}, out)
    return EXIT_OK


def cmd_series_check(args, out) -> int:
    cert = load_certificate(args.file)
    try:
        P, src, dst = cert.systems()
    except (FormatError, SystemError_) as exc:
        raise CertificateFailure(str(exc)) from None
    if not series_gauge_check(P, src, dst, args.order):
        raise CertificateFailure(f"series check failed at order {args.order}")
    _emit(args, f"series check to order {args.order}: ok", {"order": args.order, "verified": True}, out)
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="redform", description="Reduced forms of block-triangular systems over Q(x).")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, name="file"):
        sp.add_argument(name, help="input JSON file (or the name of a bundled fixture)")
        sp.add_argument("--json", nargs="?", const="-", default=None, metavar="PATH",
                        help="write the JSON report to PATH (stdout when PATH is omitted)")

    r = sub.add_parser("reduce", help="reduce a block-triangular system and report")
    common(r)
    r.add_argument("--assume-diag-reduced", action="store_true",
                   help="assert that the diagonal blocks are already in reduced form")
    r.add_argument("--branch", choices=["lex"], default="lex",
                   help="tie-break between incompatible directions (default: lex, first in flag order)")
    r.add_argument("--free", action="append", metavar="LABEL=VALUE",
                   help="value for a surviving free constant (default 0)")
    r.add_argument("--auto-flag", action="store_true", help="ignore an adapted basis stored in the file")
    r.add_argument("--asserted-diag-dim", type=int, default=None,
                   help="known Galois-Lie dimension of the diagonal")
    r.add_argument("--order", type=int, default=12, help="series cross-check order (default 12)")
    r.add_argument("--cert", metavar="PATH", help="write the (A, P, A_red) certificate")
    r.set_defaults(func=cmd_reduce)

    ld = sub.add_parser("lie-dim", help="dimension and derived series of the Lie algebra")
    common(ld)
    ld.set_defaults(func=cmd_lie_dim)

    a = sub.add_parser("adjoint", help="print psi and the flag of the coupling block")
    common(a)
    a.add_argument("--split", type=int, default=None, help="size of the first block, in the orientation of the file")
    a.set_defaults(func=cmd_adjoint)

    rs = sub.add_parser("ratsolve", help="rational solutions of a scalar linear equation")
    common(rs)
    rs.set_defaults(func=cmd_ratsolve)

    c = sub.add_parser("check", help="re-verify a certificate exactly")
    common(c, "certificate")
    c.set_defaults(func=cmd_check)

    s = sub.add_parser("series-check", help="re-verify a certificate with truncated power series")
    common(s, "certificate")
    s.add_argument("--order", type=int, default=12, help="truncation order (default 12)")
    s.set_defaults(func=cmd_series_check)
    return p


def run(argv, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_PARSE if exc.code else EXIT_OK
    if hasattr(args, "certificate"):
        args.file = args.certificate
    try:
        return args.func(args, out)
    except (FormatError, ExprError, SystemError_) as exc:
        err.write(f"error: {exc}\n")
        return EXIT_PARSE
    except UnsupportedInput as exc:
        err.write(f"unsupported input: {exc}\n")
        return EXIT_UNSUPPORTED
    except AssumptionNotAsserted as exc:
        err.write(f"assumption not asserted: {exc}\n")
        return EXIT_ASSUMPTION
    except CertificateFailure as exc:
        err.write(f"certificate failure: {exc}\n")
        return EXIT_CERT
    except OSError as exc:
        err.write(f"error: {exc}\n")
        return EXIT_PARSE


def main(argv=None) -> None:
    sys.exit(run(sys.argv[1:] if argv is None else argv))


if __name__ == "__main__":
    main()
