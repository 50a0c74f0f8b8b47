import io
import random
import json
from fractions import Fraction as Fr

import pytest

from diagmod import catalog
from diagmod.cli import (EXIT_FALSE, EXIT_OK, EXIT_USAGE, ParseError, parse, run, to_series, to_text,
                         variables)


def call(*argv):
    out = io.StringIO()
    code = run(list(argv), out)
    text = out.getvalue()
    return code, (json.loads(text) if text.startswith("{") else text)


@pytest.mark.parametrize("text", [
    "1/(1-x-y)",
    "F[2,1]([1/3, 2/3], [1], 54*x/(1-x)^3)",
    "sum(k=0..n, binom(n,k)^2*binom(n+k,k))",
    "HeunG(4, 1/2, 1/2, 1/2, 1, 1/2, 16*x)",
    "Hadamard(sqrt(1-4*x)^(-1), (1-x)^(-1))",
])
def test_parse_roundtrip(text):
    t = parse(text)
    assert parse(to_text(t)) == t


def test_parse_error_location():
    with pytest.raises(ParseError, match="line 1, column"):
        parse("1/(1-x")


def test_variables_sorted():
    assert variables(parse("1/(1 - z2 - a*z1)")) == ["a", "z1", "z2"]


def test_to_series_hypergeometric_pullback():
    f = to_series(parse("(1-x)^(-1) * F[2,1]([1/3,2/3],[1],54*x/(1-x)^3)"), 5)
    R = next(R for tag, R, _ in catalog.diagonal_corpus() if tag == "cube-8")
    from diagmod.diagonal import diagonal
    assert f == diagonal(R, 5)


def test_diag_command():
    code, out = call("diag", "1/(1-x-y)", "--order", "5")
    assert code == EXIT_OK and out["series"] == [1, 2, 6, 20, 70, 252]


def test_diag_mod_p():
    code, out = call("diag", "1/(1-z2-z3-z1*z2-z1*z3)", "--order", "9", "--prime", "7")
    assert out["series"] == [1, 4, 1, 1, 0, 0, 0, 4, 2, 4]


def test_json_output_is_deterministic():
    a = call("yukawa", "--op-name", "H44", "--order", "3")
    b = call("yukawa", "--op-name", "H44", "--order", "3")
    assert a == b and a[1]["K_q"] == [1, 32, 4896, 702464]


def test_order_from_environment(monkeypatch):
    monkeypatch.setenv("DIAGMOD_ORDER", "3")
    assert call("diag", "1/(1-x-y)")[1]["series"] == [1, 2, 6, 20]
    monkeypatch.setenv("DIAGMOD_ORDER", "many")
    assert call("diag", "1/(1-x-y)")[0] == EXIT_USAGE


def test_binsum2rat_matches():
    code, out = call("binsum2rat", "sum(k=0..n, binom(n,k)^3)", "--order", "6")
    assert code == EXIT_OK and out["matches_sum"] and out["series"] == [1, 2, 10, 56, 346, 2252, 15184]


def test_modp_verify_catalog_relation():
    code, out = call("modp-verify", "--relation", "sixth-root", "--order", "30")
    assert code == EXIT_OK and out["holds"]


def test_modp_verify_false_relation():
    code, out = call("modp-verify", "--poly", "y^2 - 1 - x", "--series", "1,1,1,1,1", "--prime", "5",
                     "--order", "4")
    assert code == EXIT_FALSE and out["holds"] is False


def test_modp_find_random_is_false():
    rng = random.Random(3)
    series = ",".join(str(rng.randrange(5)) for _ in range(80))
    code, out = call("modp-find", "--series", series, "--prime", "5", "--dx", "3", "--dy", "3", "--order", "79")
    assert code == EXIT_FALSE and out["relation"] is None


def test_guess_ode_command():
    code, out = call("guess-ode", "--series", "(1-x)^(-1)", "--order", "20")
    assert code == EXIT_OK and out["operator"] == "(x - 1)*D + (1)"


def test_nome_and_mirror():
    assert call("nome", "--op-name", "H44", "--order", "3")[1]["series"] == [0, 1, 64, 7072]
    assert call("mirror", "--op-name", "H44", "--order", "3")[1]["series"] == [0, 1, -64, 1120]


def test_operator_from_file(tmp_path):
    path = tmp_path / "op.txt"
    path.write_text("theta^2 - 4*x*(2*theta+1)^2\n")
    code, out = call("frobenius", "--op-file", str(path), "--order", "3")
    assert code == EXIT_OK and out["parts"][0] == [1, 4, 36, 400]


def test_chi_and_phid():
    assert call("chi", "--n", "2", "--order", "8")[1]["series"] == [0, 0, 0, 0, 1, 0, 20, 0, 350]
    assert call("phid", "--n", "2", "--order", "4")[1]["series"] == ["1/2", 0, 1, 0, 9]


def test_identity_command():
    code, out = call("identity", "--tag", "level2-doubling", "--order", "12")
    assert code == EXIT_OK and out["results"][0]["ok"]
    assert call("identity", "--tag", "nope", "--order", "5")[0] == EXIT_USAGE


def test_integrality_commands():
    code, out = call("integrality", "--hyp", "1/9,4/9,5/9;1/3,1;729", "--order", "40")
    assert code == EXIT_OK and out["all_integer"]
    code, out = call("integrality", "--hyp", "1/2,1/2;1/3;1", "--order", "10")
    assert code == EXIT_FALSE and out["first_failure"] == 1
    code, out = call("integrality", "--factorial", "30,1/15,10,6", "--order", "20")
    assert code == EXIT_OK


def test_bad_input_exit_codes():
    assert call("diag", "1/(1-x")[0] == EXIT_USAGE
    assert call("nome", "--op", "theta^2-1", "--order", "3")[0] == EXIT_USAGE
    assert call("nome", "--op-name", "nope")[0] == EXIT_USAGE
    assert call("nome")[0] == EXIT_USAGE
    assert call("diag", "1/(1-x-y)", "--order", "-1")[0] == EXIT_USAGE
    assert call("no-such-command")[0] == EXIT_USAGE


def test_text_format():
    code, out = call("diag", "1/(1-x)", "--order", "3", "--format", "text")
    assert code == EXIT_OK and "series: 1 + x + x^2 + x^3" in out


def test_catalog_operator_names():
    names = catalog.operator_names()
    assert {"B1", "B2", "calB2", "H23", "H44", "H46", "nonmodular-2304"} <= set(names)
    assert catalog.operator("adjoint(B2)") == catalog.operator("B2").adjoint()
    with pytest.raises(KeyError):
        catalog.operator("missing")


def test_catalog_intertwiners_hold():
    from diagmod.dfinite import op_mul
    for left, right, X, note in catalog.intertwiners():
        assert op_mul(left, X) == op_mul(X, right), note


def test_catalog_expected_values_are_fractions():
    e = catalog.expected("nonmodular-2304")
    assert e["K_q12"].denominator == 11 and isinstance(e["K_q"][0], Fr)
