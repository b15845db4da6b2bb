import io
import json
import shutil
import subprocess
import sys

import pytest

from instanton_rmatrix import __version__
from instanton_rmatrix.cli import EXIT_CHECK_FAILED, EXIT_OK, EXIT_USAGE, run
from instanton_rmatrix.jack import clear_memo


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


def test_t_eigen_text():
    code, out, _ = call("t-eigen", "--partition", "2", "--format", "text")
    assert code == EXIT_OK
    assert out.strip() == "u(u+t2)/((u+t1+t2)(u+t1+2t2))"


def test_ybe_fundamental_two():
    code, out, _ = call("ybe", "--rep", "fundamental", "--N", "2")
    assert code == EXIT_OK
    assert json.loads(out)["residual"] == "0"


def test_recover_c1_latex():
    code, out, _ = call("recover", "--target", "c1", "--max-degree", "5", "--format", "latex")
    assert code == EXIT_OK
    assert r"\frac{t_{1} t_{2}}{2}\,\alpha_{-1}\alpha_{-1}\alpha_{2}" in out
    assert r"- \frac{1}{2}\,\alpha_{-2}\alpha_{1}\alpha_{1}" in out


def test_wedge_ybe():
    code, out, _ = call("ybe", "--rep", "wedge", "--N", "3", "--degrees", "1,1,2")
    assert code == EXIT_OK


def test_stab_json():
    code, out, _ = call("stab", "--n", "1")
    data = json.loads(out)
    assert code == EXIT_OK
    assert [0, 1, "-t2-t1"] in data["restriction"]["entries"]


def test_failing_check_exit_code():
    code, _, err = call("fusion", "--N", "3", "--n1", "1", "--n2", "2")
    assert code == EXIT_CHECK_FAILED
    assert "check failed" in err


def test_contour_reports_failure():
    code, _, _ = call("contour", "--max-degree", "2")
    assert code == EXIT_CHECK_FAILED


def test_product_check_is_a_finding():
    code, out, _ = call("product-check")
    assert code == EXIT_OK
    assert json.loads(out)["report"]["stabilized"] is False


@pytest.mark.parametrize(
    "argv",
    [
        ["t-eigen"],
        ["t-eigen", "--partition", "1,2"],
        ["jack", "--degree", "99"],
        ["fusion", "--N", "2", "--n1", "4", "--n2", "3"],
        ["nonsense"],
        ["ybe", "--N", "2", "--format", "yaml"],
    ],
)
def test_usage_errors(argv):
    assert call(*argv)[0] == EXIT_USAGE


def test_version(capsys):
    assert call("--version")[0] == EXIT_OK
    assert capsys.readouterr().out.strip() == __version__


def test_verify_all_is_byte_identical():
    first = call("verify-all", "--max-degree", "5")
    second = call("verify-all", "--max-degree", "5")
    assert first == second
    report = json.loads(first[1])
    assert report["version"] == __version__
    assert [r["check"] for r in report["results"]] == [
        "stab_tp1", "ybe", "fusion", "xi_calculus", "jack_lehn",
        "boson_fermion", "chern_recovery", "commutativity", "doubling", "product_formula",
    ]
    assert all(r["runtime_ms"] == 0 for r in report["results"])
    assert first[0] == EXIT_CHECK_FAILED


def test_verify_all_parallel_matches_serial():
    only = ["--only", "stab_tp1", "ybe", "commutativity"]
    serial = call("verify-all", "--max-degree", "3", *only)
    parallel = call("verify-all", "--max-degree", "3", "--jobs", "3", *only)
    assert serial == parallel
    assert serial[0] == EXIT_OK


def test_cache_deletion_changes_no_output(tmp_path, monkeypatch):
    cache = tmp_path / "cache"
    argv = ("verify-all", "--max-degree", "4", "--only", "jack_lehn", "commutativity", "--cache-dir", str(cache))
    clear_memo()
    cold = call(*argv)
    assert any(cache.iterdir())
    clear_memo()
    warm = call(*argv)
    shutil.rmtree(cache)
    clear_memo()
    again = call(*argv)
    assert cold == warm == again
    monkeypatch.setenv("INSTANTON_RMATRIX_CACHE", str(tmp_path / "env"))
    clear_memo()
    assert call(*argv[:-2]) == cold
    clear_memo()


def test_console_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "instanton_rmatrix.cli", "t-eigen", "--partition", "1", "--format", "text"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert proc.stdout.strip() == "u/(u+t1+t2)"
