import json
from pathlib import Path

import pytest

import delaynet
from delaynet import cli, fixtures

DATA = Path(delaynet.__file__).parent / "data"


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def net(name):
    return str(DATA / f"{name}.net")


def wit(name):
    return str(DATA / f"{name}.wit")


def test_structure(capsys):
    code, out, _ = run(capsys, "structure", "-n", net("example2"), "--no-meta")
    doc = json.loads(out)
    assert code == 0 and doc["schema"] == "delaynet/1" and "meta" not in doc
    assert doc["structure"]["deficiency"] == 3


def test_meta_present_by_default(capsys):
    _, out, _ = run(capsys, "structure", "-n", net("example1"))
    assert json.loads(out)["meta"]["version"] == delaynet.__version__


@pytest.mark.parametrize(
    "name, theorem",
    [("example1", "thm1"), ("pak1", "thm3"), ("example2_distinct", "cor1_case1"), ("degenerate_pair", "thm1")],
)
def test_classify_with_witness(capsys, name, theorem):
    code, out, _ = run(capsys, "classify", "-n", net(name), "-w", wit(name), "--no-meta")
    assert code == 0
    assert json.loads(out)["certificate"]["theorem"] == theorem


def test_classify_reversible_pair_needs_no_witness(capsys):
    code, out, _ = run(capsys, "classify", "-n", net("reversible_pair"), "--no-meta")
    assert code == 0 and json.loads(out)["certificate"]["theorem"] == "lcdcbmas"


def test_classify_without_certificate_exits_2(capsys):
    code, out, _ = run(capsys, "classify", "-n", net("example1"), "--no-meta")
    assert code == 2 and json.loads(out)["certificate"]["theorem"] == "none"


def test_malformed_network_exits_1(capsys, tmp_path):
    bad = tmp_path / "bad.net"
    bad.write_text("species A\nreaction A -> : k=1\n")
    code, _, err = run(capsys, "structure", "-n", str(bad))
    assert code == 1 and "line 2" in err


def test_missing_file_exits_1(capsys, tmp_path):
    code, _, err = run(capsys, "structure", "-n", str(tmp_path / "nope.net"))
    assert code == 1 and "cannot read" in err


def test_simulate_csv(capsys, tmp_path):
    out = tmp_path / "traj.csv"
    code, _, _ = run(
        capsys, "simulate", "-n", net("pak1"), "--history", "1,1,1", "--t-end", "1", "--step", "0.1", "-o", str(out)
    )
    rows = out.read_text().strip().splitlines()
    assert code == 0 and rows[0] == "t,x_E,x_EP,x_EPP" and len(rows) == 1 + 10 + 11


def test_simulate_zero_horizon_writes_history_only(capsys):
    code, out, _ = run(capsys, "simulate", "-n", net("example1"), "--history", "2", "--t-end", "0")
    times = [float(r.split(",")[0]) for r in out.strip().splitlines()[1:]]
    assert code == 0 and times[0] == -1.0 and times[-1] == 0.0 and len(times) == 101


def test_simulate_history_file(capsys, tmp_path):
    hist = tmp_path / "h.csv"
    hist.write_text("t,x_S1\n-1,1.5\n-0.5,1.8\n0,2\n")
    code, out, _ = run(capsys, "simulate", "-n", net("example1"), "--history", str(hist), "--t-end", "0.5")
    assert code == 0 and out.startswith("t,x_S1")


def test_simulate_history_length_mismatch(capsys):
    code, _, err = run(capsys, "simulate", "-n", net("pak1"), "--history", "1,1")
    assert code == 1 and "expected 3" in err


def test_equilibrium(capsys):
    theta = ",".join(str(v) for v in fixtures.SCPAK_THETAS[2])
    code, out, _ = run(capsys, "equilibrium", "-n", net("scpak"), "-w", wit("scpak"), "--history", theta, "--no-meta")
    doc = json.loads(out)
    assert code == 0
    assert doc["invariant_set"]["kind"] == "new_scc_de3"
    assert doc["equilibrium"] == pytest.approx(fixtures.SCPAK_EQUILIBRIA[2], abs=5e-3)


def test_certify(capsys):
    code, out, _ = run(
        capsys, "certify", "-n", net("example1"), "-w", wit("example1"),
        "--history", "2", "--t-end", "10", "--no-meta",
    )
    doc = json.loads(out)
    assert code == 0 and doc["run"]["descent_ok"]


def test_analyze_writes_v_trace(capsys, tmp_path):
    out = tmp_path / "report.json"
    code, _, _ = run(
        capsys, "analyze", "-n", net("pak1"), "-w", wit("pak1"),
        "--history", "1.2,0.8,1", "--t-end", "10", "--step", "0.05", "-o", str(out),
    )
    doc = json.loads(out.read_text())
    assert code == 0
    assert doc["certificate"]["theorem"] == "thm3"
    vfile = Path(doc["runs"][0]["v_trace"])
    assert vfile.exists() and vfile.read_text().startswith("t,V,dVdt")


def test_conjugacy_find(capsys):
    code, out, _ = run(capsys, "conjugacy", "-n", net("pak1"), "-w", wit("pak1"), "--find", "--no-meta")
    doc = json.loads(out)
    assert code == 0
    assert doc["conjugacy"]["kind"] == "linearly_conjugate"
    assert "L " in doc["witness"]


def test_no_meta_is_reproducible(capsys):
    argv = ("analyze", "-n", net("example1"), "-w", wit("example1"), "--no-meta")
    first = run(capsys, *argv)
    second = run(capsys, *argv)
    assert first == second


def test_csv_format_only_for_simulate(capsys):
    code, _, err = run(capsys, "classify", "-n", net("example1"), "--format", "csv")
    assert code == 1 and "simulate" in err


def test_invalid_thread_count(capsys, tmp_path, monkeypatch):
    monkeypatch.setenv("DELAYNET_THREADS", "many")
    code, _, err = run(capsys, "repro-fig6", "--out-dir", str(tmp_path))
    assert code == 1 and "DELAYNET_THREADS" in err


@pytest.mark.slow
def test_repro_fig6_short(capsys, tmp_path, monkeypatch):
    monkeypatch.setenv("DELAYNET_THREADS", "2")
    code, out, _ = run(
        capsys, "repro-fig6", "--out-dir", str(tmp_path), "--t-end", "20", "--step", "0.01", "--no-meta"
    )
    doc = json.loads(out)
    assert code == 0 and len(doc["runs"]) == 4
    assert [r["level"] for r in doc["runs"]] == pytest.approx([25.24, 25.24, 6.56, 6.56])
    assert all(r["conservation_drift"] < 1e-5 for r in doc["runs"])
    assert (tmp_path / "level_surface_1.csv").exists()
