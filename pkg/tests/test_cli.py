"""End-to-end tests for the command line interface."""

import io
import json
import shutil
import subprocess
import sys

import jsonschema
import pytest

from padicdyn import cli, identities
from padicdyn.errors import InputError, InternalCheckError


def _schema(name):
    from importlib import resources

    with resources.files("padicdyn.schemas").joinpath(name).open() as fh:
        return json.load(fh)


def _run(capsys, argv):
    code = cli.main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def _run_json(capsys, argv, schema=None):
    code, out, err = _run(capsys, argv)
    payload = json.loads(out)
    if schema is not None:
        jsonschema.validate(payload, _schema(schema))
    return code, payload, err


def test_parse_polynomial_text():
    assert cli.parse_polynomial_text("1+3x+2x^3") == [1, 3, 0, 2]
    assert cli.parse_polynomial_text("x^5+1") == [1, 0, 0, 0, 0, 1]
    assert cli.parse_polynomial_text("2x**3 - x + 4") == [4, -1, 0, 2]
    assert cli.parse_polynomial_text("1,3,0,2") == [1, 3, 0, 2]
    assert cli.parse_polynomial_text("1, -3, 0, 2") == [1, -3, 0, 2]
    assert cli.parse_polynomial_text("x") == [0, 1]
    assert cli.parse_polynomial_text("-x^2+x") == [0, 1, -1]


def test_parse_polynomial_errors():
    for bad in ("", "2y+1", "x^", "1,two,3"):
        with pytest.raises(InputError):
            cli.parse_polynomial_text(bad)


def test_function_from_json_kinds():
    f = cli.function_from_json({"kind": "polynomial", "p": 2, "coeffs": [1, 1]}, 3)
    assert f.evaluate(3) == 4
    g = cli.function_from_json(
        {"kind": "table", "p": 2, "depth": 2, "values": [0, 2, 2, 0]}, None
    )
    assert g.evaluate(1) == 2
    h = cli.function_from_json(
        {"kind": "mahler", "p": 2, "k": 3, "terms": ["1", "5", "12", "12"]}, 3
    )
    assert [h.evaluate(x) for x in range(4)] == [1, 6, 7, 0]  # 1+3x+2x^3 mod 8


def test_function_from_json_malformed():
    with pytest.raises(InputError):
        cli.function_from_json({"p": 2}, 3)
    with pytest.raises(InputError):
        cli.function_from_json({"kind": "polynomial", "p": 2}, 3)
    with pytest.raises(InputError):
        cli.function_from_json({"kind": "table", "p": 2, "values": [0, 1]}, None)
    with pytest.raises(InputError):
        cli.function_from_json({"kind": "spline", "p": 2}, 3)


def test_expand_mahler(capsys):
    code, payload, _ = _run_json(
        capsys,
        ["expand", "1+3x+2x^3", "-p", "2", "--basis", "mahler",
         "--count", "4", "--normalized"],
        schema="series.schema.json",
    )
    assert code == 0
    assert payload["terms"] == ["1", "5", "12", "12"]
    assert payload["normalized"] == ["1", "5", "6", "6"]
    assert payload["lipschitz"]["pass"] is True


def test_expand_vdp(capsys):
    code, payload, _ = _run_json(
        capsys,
        ["expand", "1,3,0,2", "-p", "2", "--count", "4"],
        schema="series.schema.json",
    )
    assert code == 0
    assert payload["kind"] == "vdp"
    assert payload["terms"] == ["1", "6", "22", "58"]


def test_classify_not_ergodic(capsys):
    code, payload, _ = _run_json(
        capsys,
        ["classify", "1+3x+2x^3", "-p", "2"],
        schema="classify.schema.json",
    )
    assert code == 1
    assert payload["ergodicity"]["ergodic"] is False
    assert payload["ud1"]["agree"] is True
    assert payload["lipschitz"]["pass"] is True


def test_classify_ergodic(capsys):
    code, payload, _ = _run_json(
        capsys, ["classify", "x+1", "-p", "3"], schema="classify.schema.json"
    )
    assert code == 0
    assert payload["ergodicity"]["ergodic"] is True
    assert payload["measure_preserving"]["pass"] is True


def test_classify_table_input_uses_oracle(capsys, tmp_path):
    # a transitive table that is not given as a polynomial
    blob = {"kind": "table", "p": 2, "depth": 2, "values": [1, 2, 3, 0]}
    path = tmp_path / "f.json"
    path.write_text(json.dumps(blob))
    code, payload, _ = _run_json(
        capsys, ["classify", f"@{path}"], schema="classify.schema.json"
    )
    assert code == 0
    assert payload["ergodicity"]["method"] == "exhaustive-to-depth"


def test_classify_stdin(capsys, monkeypatch):
    blob = {"kind": "polynomial", "p": 2, "coeffs": [1, 1]}
    monkeypatch.setattr(sys, "stdin", io.StringIO(json.dumps(blob)))
    code, payload, _ = _run_json(
        capsys, ["classify", "-", "--depth", "4"], schema="classify.schema.json"
    )
    assert code == 0
    assert payload["depth"] == 4


def test_classify_rejects_shallow_depth(capsys):
    code, _, err = _run(capsys, ["classify", "x+1", "-p", "2", "--depth", "1"])
    assert code == 2
    assert "depth" in err


def test_inline_requires_prime(capsys):
    code, _, err = _run(capsys, ["expand", "x+1"])
    assert code == 2
    assert "prime" in err


def test_composite_prime_rejected(capsys):
    code, _, _ = _run(capsys, ["classify", "x+1", "-p", "4"])
    assert code == 2


def test_enumerate(capsys):
    code, payload, _ = _run_json(
        capsys, ["enumerate"], schema="enumerate.schema.json"
    )
    assert code == 0
    assert payload["total"] == 8 ** 4
    assert payload["ergodic"] == 64
    assert len(payload["classes"]) == 16
    assert all(len(c["members"]) == 4 for c in payload["classes"])


def test_enumerate_rejects_other_settings(capsys):
    code, _, _ = _run(capsys, ["enumerate", "-p", "3"])
    assert code == 2


def test_generate_deterministic(capsys):
    argv = ["generate", "-p", "5", "--count", "2", "--seed", "11"]
    code1, out1, _ = _run(capsys, argv)
    code2, out2, _ = _run(capsys, argv)
    assert code1 == code2 == 0
    assert out1 == out2
    payload = json.loads(out1)
    jsonschema.validate(payload, _schema("generate.schema.json"))
    assert payload["count"] == 2
    for inst in payload["instances"]:
        assert inst["linear_form"]["agree"] is True


def test_generate_explicit_data(capsys):
    code, payload, _ = _run_json(
        capsys,
        ["generate", "-p", "5", "--phi", "1,2,3,4,0", "--bvec", "1,1,1,1,1",
         "--lift", ",".join("0" * 10)],
        schema="generate.schema.json",
    )
    assert code == 0
    assert payload["count"] == 1
    inst = payload["instances"][0]
    assert inst["phi"] == ["1", "2", "3", "4", "0"]


def test_generate_poly_route(capsys):
    code, payload, _ = _run_json(
        capsys,
        ["generate", "-p", "5", "--route", "poly", "--count", "2", "--seed", "3"],
        schema="generate.schema.json",
    )
    assert code == 0
    for inst in payload["instances"]:
        assert inst["route"] == "poly"
        assert set(inst["conditions"]) == {
            "transitive_mod_p", "branch_product", "return_valuation", "combined",
        }


def test_generate_needs_prime(capsys):
    code, _, _ = _run(capsys, ["generate"])
    assert code == 2


def test_verify_single_suite(capsys):
    code, payload, _ = _run_json(
        capsys,
        ["verify", "--suite", "abc", "--p-max", "7"],
        schema="verify.schema.json",
    )
    assert code == 0
    assert payload["pass"] is True
    assert payload["suites"][0]["suite"] == "abc"
    assert payload["suites"][0]["counterexamples"] == []


def test_verify_all_suites_small(capsys):
    code, payload, _ = _run_json(
        capsys,
        ["verify", "--suite", "all", "--p-max", "5", "--s-max", "2"],
        schema="verify.schema.json",
    )
    assert code == 0
    assert {r["suite"] for r in payload["suites"]} == set(
        identities.all_suite_names()
    )
    assert all(r["pass"] for r in payload["suites"])


def test_verify_counterexamples(capsys):
    code, payload, _ = _run_json(
        capsys, ["verify", "--counterexamples"], schema="verify.schema.json"
    )
    assert code == 0
    assert payload["pass"] is True
    families = [c for c in payload["counterexamples"] if "family" in c]
    assert {c["p"] for c in families} == {2, 3, 5, 7, 11, 13}
    polys = [c for c in payload["counterexamples"] if "checks" in c]
    assert all(all(c["checks"].values()) for c in polys)


def test_verify_without_flags(capsys):
    code, _, err = _run(capsys, ["verify"])
    assert code == 2
    assert "nothing to verify" in err


def test_internal_check_exit_code(capsys, monkeypatch):
    def boom(name, **overrides):
        raise InternalCheckError("forced")

    monkeypatch.setattr(cli.identities, "verify_identity_suite", boom)
    code, _, err = _run(capsys, ["verify", "--suite", "abc"])
    assert code == 3
    assert "internal check" in err


def test_console_script():
    exe = shutil.which("padic-dyn")
    assert exe is not None
    proc = subprocess.run(
        [exe, "expand", "x+1", "-p", "3", "--basis", "mahler", "--count", "3"],
        capture_output=True, text=True, timeout=120,
    )
    assert proc.returncode == 0
    payload = json.loads(proc.stdout)
    assert payload["terms"] == ["1", "1", "0"]
