import json
import subprocess
import sys

import numpy as np
import pytest

from loopdnp.cli import main
from loopdnp.waveform_io import corpus_text, parse_waveform


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_validate_ok(capsys):
    code, out, _ = run(capsys, "validate", "corpus:LOOP-1")
    assert code == 0
    assert "pulses          24" in out
    assert "modulation_MHz  8.333" in out


def test_validate_violation(capsys, tmp_path):
    text = corpus_text("LOOP-1").replace("1,30.594,-2.026", "1,33.000,-2.026")
    p = tmp_path / "hot.csv"
    p.write_text(text)
    code, out, err = run(capsys, "validate", str(p))
    assert code == 1
    assert "VIOLATED" in out and "error:" in err


def test_usage_errors(capsys):
    assert run(capsys, "frobnicate")[0] == 2
    assert run(capsys, "validate", "corpus:LOOP-1", "--bogus")[0] == 2
    code, _, err = run(capsys, "trace")
    assert code == 2 and "usage" in err


def test_domain_errors(capsys):
    assert run(capsys, "validate", "corpus:NOPE")[0] == 1
    assert run(capsys, "validate", "/no/such/file.csv")[0] == 1
    assert run(capsys, "corpus", "export")[0] == 1


def test_corpus_list_and_export(capsys, tmp_path):
    code, out, _ = run(capsys, "corpus", "list")
    assert code == 0 and len(out.splitlines()) == 5
    assert "LOOP-4  pulses=25" in out
    code, out, _ = run(capsys, "corpus", "export", "LOOP-2")
    assert out == corpus_text("LOOP-2")
    p = tmp_path / "l5.csv"
    assert run(capsys, "corpus", "export", "LOOP-5", "--out", str(p))[0] == 0
    assert p.read_text() == corpus_text("LOOP-5")


def test_trace_row_count(capsys, tmp_path):
    out = tmp_path / "t.csv"
    code, _, _ = run(capsys, "trace", "--waveform", "corpus:LOOP-3", "--offsets", "-60:60:1",
                     "--T", "0.8676", "--nrep", "auto", "--grid", "8", "--out", str(out))
    assert code == 0
    rows = [l for l in out.read_text().splitlines() if not l.startswith("#")]
    assert rows[0] == "offset_MHz,scale,iz" and len(rows) == 122


def test_scan_and_contact(capsys):
    code, out, _ = run(capsys, "scan", "--waveform", "corpus:LOOP-1", "--offsets", "-10:10:10",
                       "--scales", "0.9:1.0:0.1", "--nrep", "7", "--grid", "4")
    assert code == 0
    assert len([l for l in out.splitlines() if not l.startswith("#")]) == 1 + 3 * 2
    code, out, _ = run(capsys, "contact", "--waveform", "corpus:LOOP-1", "--grid", "4",
                       "--nmax", "10")
    assert code == 0 and "n_rep" in out
    assert run(capsys, "scan", "--waveform", "corpus:LOOP-1", "--nrep", "0")[0] == 1


def test_simulate(capsys):
    code, out, _ = run(capsys, "simulate", "--waveform", "corpus:LOOP-1", "--nmax", "5")
    assert code == 0
    lines = out.splitlines()
    assert lines[5] == "n,t_ns,iz" and lines[6].startswith("1,120.000,")
    code, out2, _ = run(capsys, "simulate", "--waveform", "corpus:LOOP-1", "--nmax", "5",
                        "--beta", "65", "--T", "0.8676")
    assert code == 0 and out2 != out


def test_effective_json(capsys, tmp_path):
    js = tmp_path / "e.json"
    code, out, _ = run(capsys, "effective", "--waveform", "corpus:LOOP-1", "--json", str(js))
    assert code == 0 and "resonance k_I     2" in out
    data = json.loads(js.read_text())
    assert data["k_I"] == 2
    assert abs(data["electron_field_MHz"]) == pytest.approx(1.78, abs=0.01)
    assert set(data["coefficients_MHz"]) >= {"Sz", "Iz", "2SzIx"}


def test_fit(capsys, tmp_path):
    t = np.linspace(0, 40, 20)
    y = 328 * (1 - np.exp(-t / 8.4))
    p = tmp_path / "b.csv"
    p.write_text("t_s,value\n" + "".join(f"{a:.17g},{b:.17g}\n" for a, b in zip(t, y)))
    code, out, _ = run(capsys, "fit", "--model", "buildup", "--in", str(p))
    assert code == 0
    assert "eps_max       328" in out and "T_B           8.4 s" in out
    p.write_text("t_s,value\n0,1\n1,1\n2,1\n")
    assert run(capsys, "fit", "--model", "decay", "--in", str(p))[0] == 1


def test_optimize_small(capsys, tmp_path):
    wf, js = tmp_path / "opt.csv", tmp_path / "opt.json"
    argv = ["optimize", "--pulses", "4", "--offsets", "-10:10:10", "--no-ensemble",
            "--max-iters", "10", "--seeds", "2", "--out", str(wf), "--json", str(js)]
    code, out, _ = run(capsys, *argv)
    assert code == 0 and "best seed" in out
    w = parse_waveform(wf.read_text())
    assert len(w) == 4
    report = json.loads(js.read_text())
    assert [r["seed"] for r in report["runs"]] == [0, 1]
    first = (wf.read_text(), js.read_text(), out)
    run(capsys, *argv)
    code, out, _ = run(capsys, *argv)
    assert (wf.read_text(), js.read_text(), out) == first


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "loopdnp", "corpus", "list"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and "LOOP-1" in proc.stdout
