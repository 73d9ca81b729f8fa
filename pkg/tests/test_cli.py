from __future__ import annotations

import io
import json

import pytest

from redform.cli.formats import dumps, load_certificate
from redform.cli.main import run


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


def test_reduce_json_to_stdout():
    code, out, _ = call("reduce", "eight_dim.json", "--json")
    assert code == 0
    data = json.loads(out)
    assert data["lie_dim_after"] == 5
    assert data["gauge_identity"] and data["series_check"] == {"order": 12, "ok": True}


def test_reduce_json_is_deterministic(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert call("reduce", "eight_dim", "--json", str(a))[0] == 0
    assert call("reduce", "eight_dim", "--json", str(b))[0] == 0
    assert a.read_bytes() == b.read_bytes()


def test_lie_dim_text():
    code, out, _ = call("lie-dim", "four_dim")
    assert code == 0
    assert "lie_dim: 4" in out and "derived series: 4, 1, 0" in out and "solvable of depth 2" in out


@pytest.mark.parametrize("name", ["eight_dim", "hypergeometric", "heun", "four_dim"])
def test_certificates_reverify(tmp_path, name):
    cert = tmp_path / "cert.json"
    assert call("reduce", name, "--cert", str(cert))[0] == 0
    assert call("check", str(cert))[0] == 0
    assert call("series-check", str(cert), "--order", "12")[0] == 0


def test_tampered_certificate(tmp_path):
    cert = tmp_path / "cert.json"
    call("reduce", "hypergeometric", "--cert", str(cert))
    data = json.loads(cert.read_text())
    data["A_red"][2][0] = "1/x"
    cert.write_text(dumps(data))
    assert call("check", str(cert))[0] == 5
    assert call("series-check", str(cert))[0] == 5


def test_singular_gauge_in_certificate(tmp_path):
    cert = tmp_path / "cert.json"
    call("reduce", "hypergeometric", "--cert", str(cert))
    data = json.loads(cert.read_text())
    data["P"][0] = ["0", "0", "0"]
    cert.write_text(dumps(data))
    assert call("check", str(cert))[0] == 5


def test_certificate_roundtrip_exact(tmp_path):
    cert = tmp_path / "cert.json"
    call("reduce", "eight_dim", "--cert", str(cert))
    c = load_certificate(str(cert))
    assert dumps(c.to_json()) == cert.read_text()


def test_exit_codes(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"matrix": [["1/(x-"]]}')
    code, _, err = call("reduce", str(bad))
    assert code == 2 and "1:6" in err
    bad.write_text("{not json")
    assert call("reduce", str(bad))[0] == 2
    assert call("reduce", "no_such_file.json")[0] == 2
    code, _, err = call("reduce", "irrational_pole")
    assert code == 3 and "x^2 + 1" in err
    undecided = tmp_path / "undecided.json"
    data = json.loads(dumps({"matrix": [["1", "0"], ["1/x", "1"]], "blocks": [1, 1]}))
    undecided.write_text(json.dumps(data))
    assert call("reduce", str(undecided))[0] == 4
    assert call("reduce", str(undecided), "--assume-diag-reduced")[0] == 0
    assert call("bogus")[0] == 2


def test_ratsolve_heun_adjoint():
    code, out, _ = call("ratsolve", "heun_adjoint")
    assert code == 0 and out.strip() == "no rational solution"


def test_ratsolve_with_solution(tmp_path):
    f = tmp_path / "op.json"
    f.write_text(json.dumps({"operator": ["0", "1"], "rhs": "-1/x^2"}))
    code, out, _ = call("ratsolve", str(f))
    assert code == 0 and out.startswith("y = 1/x + c")


def test_adjoint_outputs():
    code, out, _ = call("adjoint", "heun")
    assert code == 0 and "irreducible" in out
    code, out, _ = call("adjoint", "eight_dim", "--json")
    levels = [(lv["summand"], len(lv["directions"])) for lv in json.loads(out)["flag"]]
    assert [n for s, n in levels if s == "h10"] == [1, 2, 4, 2, 1]


def test_free_constant_flag():
    _, a, _ = call("reduce", "eight_dim", "--json", "--free", "h10:c1,1=3")
    _, b, _ = call("reduce", "eight_dim", "--json", "--free", "h10:c1,1=-2/5")
    da, db = json.loads(a), json.loads(b)
    assert da["reduced"] == db["reduced"] and da["gauge"] != db["gauge"]
    assert call("reduce", "eight_dim", "--free", "oops")[0] == 2
