"""CLI surface: determinism of reports, exit codes, env overrides, verify."""

import json

import pytest

from fracbin import HurstParams, coefficient_table, solve_critical_hurst
from fracbin.cli import EXIT_CAP, EXIT_OK, EXIT_VALIDATION, main
from fracbin.coefficients import _TABLE_CACHE
from fracbin import verify as verify_mod


def run(args, tmp_path, name="out.json", fmt=None):
    out = tmp_path / name
    argv = list(args) + ["--out", str(out)]
    if fmt:
        argv += ["--format", fmt]
    rc = main(argv)
    return rc, out


def test_census_json_document(tmp_path):
    rc, out = run(["census", "--H", "0.75", "--N", "10"], tmp_path)
    assert rc == EXIT_OK
    doc = json.loads(out.read_text())
    assert doc["config"]["command"] == "census"
    assert doc["config"]["H"] == 0.75
    assert len(doc["coeff_cache_hash"]) == 64
    assert doc["spec"]["N"] == 10
    assert len(doc["per_level_counts"]) == 10
    assert doc["total"] == sum(doc["per_level_counts"])
    assert list(doc)[:2] == ["config", "coeff_cache_hash"]


def test_census_byte_identical(tmp_path):
    rc1, a = run(["census", "--H", "0.8", "--N", "12"], tmp_path, "a.json")
    first = a.read_bytes()
    rc2, b = run(["census", "--H", "0.8", "--N", "12"], tmp_path, "b.json")
    assert rc1 == rc2 == EXIT_OK
    assert first == b.read_bytes()  # output path is execution-only metadata
    rc3, c = run(["census", "--H", "0.8", "--N", "12"], tmp_path, "c.csv", fmt="csv")
    assert rc3 == EXIT_OK
    text = c.read_text()
    assert text.splitlines()[0].startswith("# ")
    assert "n,count,proportion" in text


def test_mc_limit_threads_byte_identical(tmp_path):
    base = ["mc-limit", "--H", "0.8", "--samples", "40000", "--seed", "7"]
    _, a = run(base + ["--threads", "1"], tmp_path, "t1.json")
    _, b = run(base + ["--threads", "8"], tmp_path, "t8.json")
    assert a.read_bytes() == b.read_bytes()
    doc = json.loads(a.read_text())
    assert doc["samples"] == 40000 and doc["K"] == 8192
    assert doc["generator"].startswith("philox4x64")


def test_mc_level_exact(tmp_path):
    rc, out = run(["mc-level", "--H", "0.8", "--n", "14", "--samples", "50"], tmp_path)
    assert rc == EXIT_OK
    doc = json.loads(out.read_text())
    assert doc["exact"] is True
    assert doc["samples"] == 2**13


def test_hc_command(tmp_path):
    rc, out = run(["hc", "--tol", "1e-8"], tmp_path)
    assert rc == EXIT_OK
    doc = json.loads(out.read_text())
    h_c, H_c = solve_critical_hurst(1e-8)
    assert doc["h_c"] == h_c and doc["H_c"] == H_c
    assert doc["residual"] <= 1e-8


def test_coeffs_csv(tmp_path):
    base = tmp_path / "tbl"
    rc = main(["coeffs", "--H", "0.7", "--n", "5", "--format", "csv", "--out", str(base)])
    assert rc == EXIT_OK
    jl = (tmp_path / "tbl_j.csv").read_text().splitlines()
    gl = (tmp_path / "tbl_g.csv").read_text().splitlines()
    assert jl[0] == "n,i,j_value,err" and gl[0] == "n,g_value,err"
    assert len(jl) == 1 + sum(n - 1 for n in range(1, 6))
    assert len(gl) == 1 + 5


def test_reach_command(tmp_path):
    rc, out = run(["reach", "--H", "0.75", "--prefix=----", "--direction", "up"], tmp_path)
    assert rc == EXIT_OK
    doc = json.loads(out.read_text())
    assert doc["steps"] == 10 and doc["level"] == 15


def test_charfn_command(tmp_path):
    rc, out = run(["charfn", "--H", "0.8", "--v-max", "2.0", "--points", "5", "--fit"], tmp_path)
    assert rc == EXIT_OK
    doc = json.loads(out.read_text())
    assert doc["points"][0] == [0.0, 1.0]
    assert abs(doc["fit"]["exponent"] - doc["fit"]["target_exponent"]) <= 0.2


def test_convergence_command(tmp_path):
    rc, out = run(
        ["convergence", "--H", "0.8", "--n-list", "10,14", "--samples", "20000", "--seed", "3"],
        tmp_path,
    )
    assert rc == EXIT_OK
    doc = json.loads(out.read_text())
    assert [lev["n"] for lev in doc["levels"]] == [10, 14]
    assert 0 <= doc["limit"]["p_hat"] <= 1


def test_exit_codes(tmp_path):
    assert main(["census", "--H", "1.2", "--N", "5"]) == EXIT_VALIDATION
    assert main(["census", "--H", "0.75", "--N", "40"]) == EXIT_CAP
    assert main(["mc-limit", "--H", "0.7", "--tail-sd-tol", "1e-9", "--samples", "10"]) == EXIT_CAP
    with pytest.raises(SystemExit) as exc:
        main(["not-a-command"])
    assert exc.value.code == EXIT_VALIDATION


def test_env_override(tmp_path, monkeypatch):
    monkeypatch.setenv("FRACBIN_SAMPLES", "321")
    rc, out = run(["mc-limit", "--H", "0.7", "--seed", "1"], tmp_path)
    assert rc == EXIT_OK
    assert json.loads(out.read_text())["samples"] == 321


def test_stdout_output(capsys):
    rc = main(["hc", "--tol", "1e-6"])
    assert rc == EXIT_OK
    doc = json.loads(capsys.readouterr().out)
    assert 0.5 < doc["h_c"] < 0.75


def test_verify_fast_battery(tmp_path):
    rc, out = run(["verify"], tmp_path)
    assert rc == EXIT_OK
    doc = json.loads(out.read_text())
    assert doc["all_passed"] is True
    names = {c["name"] for c in doc["checks"]}
    assert {"scaling_law", "coefficient_brackets", "census_agreement",
            "mc_determinism", "critical_point"} <= names


def test_verify_detects_corrupted_table():
    # perturbing a stored golden coefficient by 1e-6 must fail verify; the
    # golden comparison is the check sensitive at that scale (the bracket
    # inequalities are ~j*alpha/n wide, orders larger than 1e-6)
    params = HurstParams(0.75)
    table = coefficient_table(params, 5)
    key = next(k for k, v in _TABLE_CACHE.items() if v is table)
    j_bad = table.j.copy()
    j_bad[1] += 1e-6
    j_bad.setflags(write=False)
    import dataclasses

    _TABLE_CACHE[key] = dataclasses.replace(table, j=j_bad)
    try:
        assert not verify_mod.check_goldens()["passed"]
    finally:
        _TABLE_CACHE[key] = table
        assert verify_mod.check_goldens()["passed"]
