import json
import shutil
import subprocess
import sys

import pytest

from kuga_satake import acceptance, cli
from kuga_satake.config import ConfigError, RunConfig, load_config


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_classify_division(capsys):
    code, out, _ = run(capsys, "classify", "--diag", "-1,-1,3")
    assert code == 0
    data = json.loads(out)
    assert data["split"] is False and data["quaternion"]["ram"] == [2, 3]
    assert data["isogeny"]["summary"] == "simple abelian surface"
    assert data["assumes_generic"] is True


def test_classify_split(capsys):
    code, out, _ = run(capsys, "classify", "--diag=-1,-1,1")
    data = json.loads(out)
    assert code == 0 and data["split"] is True and data["reduced_matrix_size"] == 2
    assert data["symbols"][0]["witness"] is not None


def test_classify_weil_type(capsys):
    code, out, _ = run(capsys, "classify", "--diag", "-1,-1,1,1,1,3")
    data = json.loads(out)
    assert code == 0
    assert data["center"] == "Q(sqrt -3)" and data["split"] is True and data["reduced_matrix_size"] == 4
    assert data["isogeny"]["ks_dim"] == 16


def test_classify_gram_and_stdin(capsys, monkeypatch, tmp_path):
    gram = '{"gram": [[0, 1, 0], [1, 0, 0], [0, 0, -3]]}'
    code, out, _ = run(capsys, "classify", "--gram", gram)
    assert code == 0 and "change_of_basis" in json.loads(out)
    p = tmp_path / "form.json"
    p.write_text('{"diag": ["-1", "-1", "7"]}')
    code, out, _ = run(capsys, "classify", "--input", str(p))
    assert code == 0 and json.loads(out)["split"] is False
    import io

    monkeypatch.setattr(sys, "stdin", io.StringIO('{"diag": [-1, -1, 1]}'))
    code, out, _ = run(capsys, "classify", "--input", "-")
    assert code == 0 and json.loads(out)["split"] is True


def test_rationals_are_strings(capsys):
    code, out, _ = run(capsys, "classify", "--diag", "-1/4,-1,3/2")
    assert code == 0
    assert json.loads(out)["form"]["diag"] == ["-1/4", "-1", "3/2"]


@pytest.mark.parametrize(
    "argv,code",
    [
        (["classify", "--diag", "-1,x,3"], 2),
        (["classify", "--gram", "[[1, 2"], 2),
        (["classify", "--gram", '{"gram": [[1, 2], [3, 1]]}'], 2),
        (["classify"], 2),
        (["frobnicate"], 2),
        (["classify", "--diag", "-1,0,3"], 3),
        (["classify", "--gram", '{"gram": [[1, 1], [1, 1]]}'], 3),
        (["report", "--diag", "1,1,1"], 3),
        (["report", "--diag", "-1,-1"], 3),
        (["report", "--diag", "-1,-1,1", "--v", "1,0,0", "--w", "0,0,1"], 3),
        (["report", "--diag", "-1,-1,1", "--v", "1,0,0"], 2),
        (["report", "--diag", "-1,-1,1", "--plane", "[1]"], 2),
        (["classify", "--diag", "-1,-1,3", "--tolerance", "-1"], 2),
    ],
)
def test_exit_codes(capsys, argv, code):
    got, _, err = run(capsys, *argv)
    assert got == code
    if code:
        assert err


def test_report_aligned_and_parameters_agree(capsys):
    code, out1, _ = run(capsys, "report", "--diag", "-1,-1,1")
    assert code == 0
    code, out2, _ = run(capsys, "report", "--diag", "-1,-1,1", "--a", "0", "--b", "0")
    assert code == 0
    r1, r2 = json.loads(out1), json.loads(out2)
    assert r1["ks_dim"] == 2 and r1["pass"] is True
    assert r1["period_matrix"] == r2["period_matrix"]
    assert r1["polarization_matrix"] == r2["polarization_matrix"]


def test_report_plane_json_and_vectors(capsys):
    code, out, _ = run(capsys, "report", "--diag", "-2,-3,5,7", "--plane", '{"v": ["1", "0", "0", "0"], "w": [0, 1, "1/5", 0]}', "--summary")
    assert code == 0 and json.loads(out)["pass"] is True
    code, out, _ = run(capsys, "report", "--diag", "-2,-3,5,7", "--v", "1,0,0.1,0", "--w", "0,1,0,-0.2", "--summary")
    assert code == 0 and "period_matrix" not in json.loads(out)


def test_report_sweep(capsys):
    code, out, _ = run(capsys, "report", "--diag", "-1,-1,1,2", "--sweep", "10", "--seed", "5")
    data = json.loads(out)
    assert code == 0 and data["pass"] is True and len(data["sweep"]) == 10


def test_report_deterministic(capsys):
    argv = ["report", "--diag", "-1,-2,3,5", "--random-plane", "--seed", "9"]
    _, a, _ = run(capsys, *argv)
    _, b, _ = run(capsys, *argv)
    assert a == b


def test_report_overtight_tolerance_exit_4(capsys):
    code, out, _ = run(capsys, "report", "--diag", "-2,-3,5,7", "--random-plane", "--tolerance", "1e-20", "--summary")
    assert code == 4


def test_hodge_verify(capsys):
    code, out, _ = run(capsys, "hodge-verify", "--diag", "-1,-1,2,3", "--random-plane")
    data = json.loads(out)
    assert code == 0 and data["pass"] is True
    names = {c["name"] for c in data["checks"]}
    assert {"riemann_relation", "cspin_membership", "rho_hs_equals_h"} <= names


def test_output_file_and_config(capsys, tmp_path):
    cfg = tmp_path / "run.toml"
    cfg.write_text('tolerance = 1e-10\nseed = 3\nwitness_height = 20\n')
    dest = tmp_path / "out.json"
    code, out, _ = run(capsys, "classify", "--diag", "-1,-1,1", "--config", str(cfg), "--output", str(dest))
    assert code == 0 and out == ""
    assert json.loads(dest.read_text())["split"] is True


def test_load_config(tmp_path):
    p = tmp_path / "c.json"
    p.write_text('{"tolerance": 1e-8, "oracle_bound": 4}')
    cfg = load_config(p)
    assert cfg.tolerance == 1e-8 and cfg.oracle_bound == 4 and cfg.witness_height == 50
    bad = tmp_path / "bad.toml"
    bad.write_text("frob = 1\n")
    with pytest.raises(ConfigError):
        load_config(bad)
    with pytest.raises(ConfigError):
        RunConfig(witness_height=0)
    with pytest.raises(ConfigError):
        RunConfig(tolerance=0)
    assert RunConfig().updated(seed=None, tolerance=1e-7).tolerance == 1e-7


def _fast_criteria(monkeypatch):
    # the full suite runs in test_acceptance; here only the reporting path matters
    monkeypatch.setattr(acceptance, "CRITERIA", [acceptance.classification_goldens, acceptance.ks_reports, acceptance.embedding_equivariance])


def test_selftest_reports_overtight_failures(capsys, monkeypatch):
    _fast_criteria(monkeypatch)
    code, out, _ = run(capsys, "selftest", "--tolerance", "1e-15")
    assert code == 4
    assert "[PASS] 2." in out and "[FAIL] 7." in out
    assert "max_deviation" in out


def test_selftest_json(capsys, monkeypatch):
    _fast_criteria(monkeypatch)
    code, out, err = run(capsys, "selftest", "--json")
    assert code == 0
    assert json.loads(out)["pass"] is True
    assert "[PASS]" in err


@pytest.mark.slow
def test_selftest_restricted_oracle_bound(capsys):
    code, out, _ = run(capsys, "selftest", "--oracle-bound", "3")
    assert code == 0, out
    assert "n <= 3" in out


def test_console_script():
    exe = shutil.which("kuga-satake")
    argv = [exe] if exe else [sys.executable, "-m", "kuga_satake.cli"]
    res = subprocess.run(argv + ["classify", "--diag", "-1,-1,3"], capture_output=True, text=True)
    assert res.returncode == 0 and json.loads(res.stdout)["split"] is False
