import json
import shutil
import subprocess
import sys

import pytest

from latlift.cli import main
from latlift.io import BUNDLED


def run(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr().out


# congruence lattices

@pytest.mark.parametrize("name, line", [
    ("T1", "T1: 2 congruences (simple)"),
    ("S0", "S0: 16 congruences ≅ 2^4"),
    ("S1", "S1: 4 congruences ≅ 2^2"),
    ("N5", "N5: 5 congruences not Boolean"),
])
def test_con(capsys, name, line):
    code, out = run(capsys, "con", name)
    assert code == 0 and out.splitlines()[0] == line
    assert "Hasse diagram of Con:" in out


def test_con_accepts_paths(capsys):
    code, out = run(capsys, "con", str(BUNDLED / "S2.json"))
    assert code == 0 and out.startswith("S2: 4 congruences ≅ 2^2")


def test_con_json(capsys):
    code, out = run(capsys, "con", "S0", "--json")
    rec = json.loads(out)
    assert rec["congruences"] == 16 and rec["boolean_rank"] == 4


# enumerations

def test_maximal_sublattices(capsys):
    code, out = run(capsys, "sublattices", "T1", "--maximal", "--json")
    rec = json.loads(out)
    assert rec["count"] == 6
    assert sorted(r["removed"] for r in rec["sublattices"]) == [[f"a{k}"] for k in range(1, 7)]


def test_si_simple_length_four(capsys):
    code, out = run(capsys, "si", "V2", "--simple", "--length", "4", "--json")
    rec = json.loads(out)
    assert code == 0 and sorted(m["size"] for m in rec["members"]) == [11, 12, 12, 12]
    assert rec["finitely_semisimple"]


def test_si_reports_non_semisimple(capsys):
    code, out = run(capsys, "si", "N5")
    assert "finitely semisimple: no" in out


def test_member(capsys):
    assert run(capsys, "member", "V2", "T1")[1].strip() == "T1 is not in HSP(T2, T3, T4)"
    assert run(capsys, "member", "V1", "S0")[1].strip() == "S0 is in HSP(T1)"


# lifting

def test_lift_search(capsys):
    code, out = run(capsys, "lift", "Dvec", "V1")
    assert code == 0 and out.startswith("lifting of Dvec found in HSP(T1)")


def test_lift_verify_square(capsys):
    code, out = run(capsys, "lift", "Dvec", "V1", "--mode", "verify", "--lifting", "square")
    assert code == 0 and out.strip() == "square lifts Dvec"


def test_lift_certificate(capsys):
    code, out = run(capsys, "lift", "Dvec", "V2", "--mode", "section7")
    lines = out.splitlines()
    assert code == 0 and lines[0] == "Dvec has no lifting in HSP(T2, T3, T4):"
    assert [l.split(":")[0].strip() for l in lines[1:]] == ["case B3=T2", "case B3=T3", "case B3=T4"]


def test_lift_trivial(capsys):
    code, out = run(capsys, "lift", "const1", "V2")
    assert code == 0 and "lifting of const1 found" in out


def test_lift_incomplete_pools_is_truncated(capsys):
    code, out = run(capsys, "lift", "Dvec", "V2", "--max-size", "6")
    assert code == 3 and "not a proof of non-existence" in out


def test_lift_case_cap_is_truncated(capsys):
    code, out = run(capsys, "lift", "Dvec", "V1", "--max-cases", "1")
    assert code == 3 and out.startswith("search truncated")


# condensate and σ

def test_condensate_lattice_diagram(capsys):
    code, out = run(capsys, "condensate", "S1_in_T1", "--k", "2")
    assert code == 0 and out.startswith("Cond(S1_in_T1, T_2): 1859 elements")
    assert out.count("iso True") == 3


def test_condensate_semilattice_diagram(capsys):
    code, out = run(capsys, "condensate", "const2", "--k", "2")
    assert code == 0 and out.count(": ok") == 3


def test_condensate_wrong_index(capsys):
    code, out = run(capsys, "condensate", "Dvec")
    assert code == 2


def test_sigma(capsys):
    code, out = run(capsys, "sigma-select", "--chain", "2", "--capacity", "3", "--json")
    rec = json.loads(out)
    assert rec["status"] == "ok" and rec["compatible"] and rec["covering_size"] == 4


def test_sigma_exhausted(capsys, tmp_path):
    fam = tmp_path / "fam.json"
    fam.write_text(json.dumps({"{}": ["{1:0}"]}))
    code, out = run(capsys, "sigma-select", "--chain", "2", "--capacity", "1", "--family", str(fam))
    assert code == 0 and out.startswith("capacity exhausted at node 1")


# reproduction and negative controls

def test_reproduce(capsys):
    code, out = run(capsys, "reproduce-paper")
    assert code == 0
    assert sum(l.startswith("[PASS]") for l in out.splitlines()) == 7
    assert "[INFO] 7." in out


def test_reproduce_corrupted_T1(capsys, tmp_path):
    rec = json.loads((BUNDLED / "T1.json").read_text())
    rec["covers"] = [c for c in rec["covers"] if c[0] != "bot"]  # no least element
    (tmp_path / "T1.json").write_text(json.dumps(rec))
    code, out = run(capsys, "reproduce-paper", "--fixtures", str(tmp_path))
    assert code == 2
    assert out.splitlines()[0].startswith("[FAIL] 1.") and "invalid input" in out
    assert "stopped: invalid fixture" in out


def test_reproduce_without_T4(capsys, tmp_path):
    (tmp_path / "V2.json").write_text(json.dumps({"name": "V2", "generators": ["T2", "T3"]}))
    code, out = run(capsys, "reproduce-paper", "--fixtures", str(tmp_path))
    assert code == 4
    assert "claims not reproduced: 4, 5, 6" in out


def test_certificate_without_T4(capsys, tmp_path):
    (tmp_path / "V2.json").write_text(json.dumps({"name": "V2", "generators": ["T2", "T3"]}))
    code, out = run(capsys, "lift", "Dvec", "V2", "--mode", "section7", "--fixtures", str(tmp_path))
    assert code == 4 and out.startswith("certificate failed at step b")


def test_missing_fixture(capsys):
    assert main(["con", "no_such_lattice"]) == 2


def test_not_a_lattice(capsys, tmp_path):
    (tmp_path / "anti.json").write_text(json.dumps({"elements": ["a", "b"], "covers": []}))
    assert main(["con", str(tmp_path / "anti.json")]) == 2


# outputs

def test_out_and_manifest(capsys, tmp_path):
    out = tmp_path / "con.json"
    assert main(["con", "S1", "--out", str(out)]) == 0
    man = json.loads((tmp_path / "con.json.manifest.json").read_text())
    assert man["command"] == "con" and "S1" in man["fixtures"] and man["threads"] == 1
    assert len(man["fixtures"]["S1"]) == 64 and len(man["result_digest"]) == 64


def test_out_is_byte_stable_and_thread_independent(capsys, tmp_path):
    paths = []
    for k, threads in enumerate(["1", "1", "4"]):
        p = tmp_path / f"r{k}.json"
        assert main(["lift", "Dvec", "V1", "--threads", threads, "--out", str(p)]) == 0
        paths.append(p.read_bytes())
    assert paths[0] == paths[1] == paths[2]


def test_console_script():
    exe = shutil.which("latlift")
    cmd = [exe] if exe else [sys.executable, "-m", "latlift.cli"]
    res = subprocess.run(cmd + ["con", "T1"], capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout.startswith("T1: 2 congruences (simple)")
