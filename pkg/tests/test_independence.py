from __future__ import annotations

from conftest import reduce_fixture
from redform.independence import independence_report
from redform.reducer import reduce_multi_block
from redform.cli.formats import load_system


def test_heun_dimension_five_and_both_integrals():
    rep = reduce_fixture("heun")
    ind = independence_report(rep, asserted_diag_dim=3)
    assert ind.galois_dim == 5 and ind.exact
    assert ind.integrals[0]["verdict"] == "independent"
    assert any(s.startswith("both integrals are algebraically independent") for s in ind.statements)


def test_hypergeometric_relation():
    ind = independence_report(reduce_fixture("hypergeometric"), asserted_diag_dim=3)
    item = ind.integrals[0]
    assert item["verdict"] == "dependent"
    assert item["coefficients"] == {"Y1": "45/44*x - 15/44", "Y2": "-9/11*x^2 + 9/11*x"}
    assert ind.galois_dim == 3


def test_four_dim_dilog_statement():
    ind = independence_report(reduce_multi_block(load_system("four_dim").system(True)))
    assert ind.generators[:3] == ["exp(x)", "ln(x)", "ln(x-1)"]
    assert "dilog(x) is algebraically independent of exp(x), ln(x), ln(x-1)" in ind.statements


def test_without_assertion_dimension_is_a_bound():
    ind = independence_report(reduce_fixture("hypergeometric"))
    assert ind.diag_dim_source == "bracket closure"
    assert "dimension 4" not in ind.text()
