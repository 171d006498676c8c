import json
import os

import pytest

from trrkit.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_scan_command(tmp_path, capsys):
    out = tmp_path / "scan.json"
    code, _, _ = run(capsys, "scan", "--g-min", "1", "--g-max", "7", "--out", str(out))
    assert code == 0
    payload = json.loads(out.read_text())
    assert payload["result"]["zeros"] == [[7, 4, 3, [1, 1, 2]]]
    assert payload["result"]["range"] == [1, 7]
    assert payload["manifest"]["command"] == "scan"
    assert "result_digest" in payload["manifest"]


def test_scan_jobs_deterministic_bytes(tmp_path, capsys):
    a = tmp_path / "a.json"
    b = tmp_path / "b.json"
    assert run(capsys, "scan", "--g-min", "2", "--g-max", "8", "--jobs", "1", "--out", str(a))[0] == 0
    assert run(capsys, "scan", "--g-min", "2", "--g-max", "8", "--jobs", "2", "--out", str(b))[0] == 0
    ja = json.loads(a.read_text())
    jb = json.loads(b.read_text())
    assert json.dumps(ja["result"], sort_keys=True) == json.dumps(jb["result"], sort_keys=True)
    assert ja["manifest"]["result_digest"] == jb["manifest"]["result_digest"]


def test_check_command(tmp_path, capsys):
    out = tmp_path / "scan.json"
    run(capsys, "scan", "--g-min", "1", "--g-max", "3", "--out", str(out))
    code, stdout, _ = run(capsys, "check", str(out))
    assert code == 0 and "ok" in stdout
    payload = json.loads(out.read_text())
    payload["result"]["cells_checked"] += 1
    out.write_text(json.dumps(payload))
    code, _, err = run(capsys, "check", str(out))
    assert code == 3
    assert "mismatch" in err


def test_d_command(capsys):
    code, out, _ = run(capsys, "d", "--g", "2", "--k", "1", "--l", "1")
    assert code == 0 and out.strip() == "-2/7"
    code, out, _ = run(capsys, "d", "--g", "7", "--k", "3", "--l", "2,1,1")
    assert code == 0 and out.strip() == "0"
    code, out, _ = run(capsys, "d", "--g", "3", "--k", "1", "--l", "1,1")
    assert code == 0 and out.strip() == "-1/5"


def test_d_usage_error(capsys):
    code, _, err = run(capsys, "d", "--g", "3", "--k", "1", "--l", "5")
    assert code == 1
    assert "usage" in err


def test_principal_command(tmp_path, capsys):
    out = tmp_path / "p.json"
    code, _, _ = run(capsys, "principal", "--g", "2", "--k", "1", "--l", "1", "--out", str(out))
    assert code == 0
    payload = json.loads(out.read_text())
    terms = {tuple(t["exponents"]): t["coeff"] for t in payload["result"]["principal"]}
    assert terms == {(1, 1): "1", (2, 0): "-3"}
    assert payload["result"]["provenance"]["D"] == "-2/7"


def test_principal_exceptional_case_errors(capsys):
    code, _, err = run(capsys, "principal", "--g", "7", "--k", "3", "--l", "2,1,1")
    assert code == 2
    assert "g7" in err


def test_principal_n1_path(tmp_path, capsys):
    out = tmp_path / "n1.json"
    code, _, _ = run(capsys, "principal", "--g", "1", "--k", "1", "--out", str(out))
    assert code == 0
    payload = json.loads(out.read_text())
    assert payload["result"]["provenance"]["normalization"] == "72"
    assert payload["result"]["principal"] == [{"exponents": [1], "coeff": "1"}]


def test_pixton_unit(tmp_path, capsys):
    out = tmp_path / "unit.json"
    code, _, _ = run(
        capsys, "pixton", "--g", "0", "--n", "3", "--a", "0,0,0", "--degree", "0",
        "--out", str(out),
    )
    assert code == 0
    payload = json.loads(out.read_text())
    assert len(payload["result"]["terms"]) == 1
    assert payload["result"]["terms"][0]["coeff"] == "1"
    assert payload["result"]["terms"][0]["graph"]["edges"] == []


def test_pixton_monomial(tmp_path, capsys):
    out = tmp_path / "mono.json"
    code, _, _ = run(
        capsys, "pixton", "--g", "1", "--n", "2", "--b-exponents", "2",
        "--degree", "1", "--out", str(out),
    )
    assert code == 0
    payload = json.loads(out.read_text())
    coeffs = sorted(
        (rec["psi"], rec["coeff"]) for rec in payload["result"]["terms"]
    )
    assert coeffs == [([[1, 1]], "1/2"), ([[2, 1]], "1/2")]
    assert payload["manifest"]["r_nodes"]


def test_pixton_fixed_r(tmp_path, capsys):
    out = tmp_path / "fixed.json"
    code, _, _ = run(
        capsys, "pixton", "--g", "1", "--n", "1", "--a", "0", "--degree", "1",
        "--r", "5", "--out", str(out),
    )
    assert code == 0
    payload = json.loads(out.read_text())
    by_edges = {
        len(rec["graph"]["edges"]): rec["coeff"] for rec in payload["result"]["terms"]
    }
    assert by_edges == {0: "1", 1: "1"}  # (r^2-1)/24 = 1 at r = 5


def test_pixton_usage(capsys):
    code, _, err = run(capsys, "pixton", "--g", "1", "--n", "1", "--degree", "1")
    assert code == 1


def test_usage_never_writes_partial_output(tmp_path, capsys):
    out = tmp_path / "never.json"
    code, _, _ = run(capsys, "d", "--g", "3", "--k", "1", "--l", "7")
    assert code == 1
    assert not out.exists()


def test_guard_exit_code(capsys):
    code, _, err = run(
        capsys, "pixton", "--g", "2", "--n", "7", "--b-exponents", "1,1,1,1,1,1",
        "--degree", "3",
    )
    assert code == 2


def test_g7_command(tmp_path, capsys):
    out = tmp_path / "g7.json"
    code, _, _ = run(capsys, "g7", "--out", str(out))
    assert code == 0
    payload = json.loads(out.read_text())
    assert payload["result"]["ok"]
    assert payload["result"]["D_2_2_1"] == "-16/399"
    rec = payload["result"]["record_psi1_3"]
    assert rec["principal"] == [{"exponents": [3, 2, 1, 1], "coeff": "1"}]


def test_trr_jobs_env_default(monkeypatch):
    from trrkit.cli import build_parser

    monkeypatch.setenv("TRR_JOBS", "3")
    parser = build_parser()
    args = parser.parse_args(["scan", "--g-min", "1", "--g-max", "2"])
    assert args.jobs == 3


@pytest.mark.slow
@pytest.mark.skipif(
    os.environ.get("TRRKIT_ALLOW_LARGE") != "1",
    reason="set TRRKIT_ALLOW_LARGE=1 to run the pipeline comparison via the CLI",
)
def test_omega_command(tmp_path, capsys):
    out = tmp_path / "omega.json"
    code, _, _ = run(capsys, "omega", "--g", "1", "--n", "1", "--out", str(out))
    assert code == 0
    payload = json.loads(out.read_text())
    assert payload["result"]["all_match"]


def test_unwritable_output_path(capsys):
    code, _, err = run(
        capsys, "scan", "--g-min", "1", "--g-max", "2",
        "--out", "/nonexistent-dir/scan.json",
    )
    assert code != 0
    assert "error" in err
