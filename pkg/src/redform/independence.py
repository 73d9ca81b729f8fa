"""Transcendence statements derived from a reduction report.

Once the diagonal is (assumed) reduced and the coupling has been reduced,
the Galois-Lie dimension equals the diagonal's dimension plus the dimension
of the off-diagonal part that survived.  For systems augmented by integral
rows this decides, row by row, whether an integral is expressible through
the diagonal solutions.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .diffsys import UPPER, to_lower
from .exactfield import RatFunc, format_ratfunc
from .liealgebra import wei_norman
from .reducer import ReductionReport


@dataclass
class IndependenceReport:
    galois_dim: int
    exact: bool
    diag_dim: int
    diag_dim_source: str  # "asserted" or "bracket closure"
    unremovable_dim: int
    integrals: list = field(default_factory=list)
    generators: list = field(default_factory=list)
    statements: list = field(default_factory=list)
    caveats: list = field(default_factory=list)

    def text(self) -> str:
        lines = []
        kind = "Galois-Lie dimension" if self.exact else "Galois-Lie dimension (bound)"
        lines.append(
            f"{kind}: {self.galois_dim} = {self.diag_dim} (diagonal, {self.diag_dim_source})"
            f" + {self.unremovable_dim} (unremovable coupling)"
        )
        for item in self.integrals:
            if item["verdict"] == "dependent":
                lines.append(f"integral row {item['row'] + 1}: dependent, {item['relation']}")
            else:
                lines.append(f"integral row {item['row'] + 1}: independent")
        lines.extend(self.statements)
        lines.extend(f"caveat: {c}" for c in self.caveats)
        return "\n".join(lines)

    def to_dict(self) -> dict:
        return {
            "galois_dim": self.galois_dim,
            "exact": self.exact,
            "diag_dim": self.diag_dim,
            "diag_dim_source": self.diag_dim_source,
            "unremovable_dim": self.unremovable_dim,
            "integrals": self.integrals,
            "generators": self.generators,
            "statements": self.statements,
            "caveats": self.caveats,
        }


def _log_point(f: RatFunc):
    """``a`` when ``f = c / (x - a)`` for a nonzero constant ``c``, else None."""
    if f.num.degree != 0 or f.den.degree != 1:
        return None
    return -f.den.coeffs[0]


def _ln_label(a: Fraction) -> str:
    if a == 0:
        return "ln(x)"
    s = str(abs(a)) if a.denominator == 1 else f"{abs(a.numerator)}/{a.denominator}"
    return f"ln(x-{s})" if a > 0 else f"ln(x+{s})"


def generator_labels(rep: ReductionReport) -> list[str]:
    """Name each element of the reduced Lie basis by the function it brings in."""
    basis = rep.lie_after
    if basis is None:
        return []
    decomp = wei_norman(rep.reduced)
    n = rep.reduced.n
    labels, points = [], []
    for word in basis.words:
        if word[0] == "gen":
            f = decomp.funcs[word[1]]
            M = decomp.mats[word[1]]
            scalar = all(M[i][j] == (M[0][0] if i == j else 0) for i in range(n) for j in range(n))
            a = _log_point(f)
            if f == 1 and scalar:
                labels.append("exp(x)")
                points.append(None)
            elif a is not None:
                labels.append(_ln_label(a))
                points.append(a)
            else:
                labels.append(f"int({format_ratfunc(f)})")
                points.append(None)
            continue
        _, i, j = word
        pi, pj = points[i], points[j]
        if pi is not None and pj is not None and {pi, pj} == {Fraction(0), Fraction(1)}:
            labels.append("dilog(x)")
        else:
            labels.append(f"[{labels[i]}, {labels[j]}]")
        points.append(None)
    return labels


def independence_report(rep: ReductionReport, asserted_diag_dim: int | None = None) -> IndependenceReport:
    caveats = []
    if asserted_diag_dim is not None:
        diag_dim, source = asserted_diag_dim, "asserted"
    else:
        diag_dim, source = rep.diag_lie_dim, "bracket closure"
    unremovable = rep.lie_dim_after - rep.diag_lie_dim
    exact = rep.diag_reduced_assumed and (asserted_diag_dim is not None or rep.envelope_certified)
    if rep.diag_reduced_assumed:
        caveats.append("the diagonal blocks are assumed to be in reduced form (not verified)")
    else:
        caveats.append("the diagonal was not asserted reduced: all dimensions are upper bounds")
    if asserted_diag_dim is None and not rep.envelope_certified:
        caveats.append(
            "bracket closure is not certified to be algebraic: the dimension is a lower bound for Lie(A_red)"
        )
    out = IndependenceReport(diag_dim + unremovable, exact, diag_dim, source, unremovable, caveats=caveats)

    # integral rows, in lower coordinates
    red = to_lower(rep.reduced)
    P = rep.gauge.flipped().P if rep.reduced.orientation == UPPER else rep.gauge.P
    orig = to_lower(rep.original)
    n1 = rep.split[0]
    rows = list(orig.integrals)
    independent = []
    for row, src in rows:
        if not any(red.A[row]):
            terms = []
            coeffs = {}
            for j in range(n1):
                c = P[row][j]
                if c:
                    coeffs[j] = c
                    terms.append(f"({format_ratfunc(c)})*Y{j + 1}")
            relation = f"int(Y{src + 1}) = " + (" + ".join(terms) if terms else "0") + " + c"
            out.integrals.append(
                {
                    "row": row,
                    "source": src,
                    "verdict": "dependent",
                    "relation": relation,
                    "coefficients": {f"Y{j + 1}": format_ratfunc(c) for j, c in coeffs.items()},
                }
            )
        else:
            out.integrals.append({"row": row, "source": src, "verdict": "independent"})
            independent.append(row)
    if independent and exact:
        m = len(rows)
        if unremovable == n1 * m:
            count = n1 * m
            who = "both integrals are" if count == 2 else f"all {count} integrals are"
            out.statements.append(
                f"{who} algebraically independent over the field generated by the diagonal solutions"
            )
        else:
            out.statements.append(
                "each unremovable integral direction is algebraically independent of the diagonal solutions"
            )

    labels = generator_labels(rep)
    out.generators = labels
    if exact and rep.lie_after is not None:
        gens = [lab for lab, w in zip(labels, rep.lie_after.words) if w[0] == "gen"]
        for lab, w in zip(labels, rep.lie_after.words):
            if w[0] == "br" and not lab.startswith("["):
                out.statements.append(f"{lab} is algebraically independent of {', '.join(gens)}")
    return out
