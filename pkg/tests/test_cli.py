import io
import json
import shutil
import subprocess
import sys

import pytest

from conftest import DATA, PACKAGE_DATA
from normsel.cli import main
from normsel.sequences import bernoulli, champernowne
from normsel.validation import format_digits


def run(argv, capsys, monkeypatch, stdin=""):
    monkeypatch.setattr(sys, "stdin", io.StringIO(stdin))
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_gen_and_select_compose(capsys, monkeypatch):
    code, out, _ = run(["gen", "--kind", "champernowne", "--length", "12"], capsys, monkeypatch)
    assert code == 0 and out.strip() == "110111001011"
    code, sel, _ = run(["select", "--automaton", "builtin:ends_with_one"], capsys, monkeypatch, out)
    assert code == 0 and set(sel.strip()) == {"1"}


def test_gen_bernoulli_needs_p(capsys, monkeypatch):
    code, _, err = run(["gen", "--kind", "bernoulli", "--length", "5"], capsys, monkeypatch)
    assert code == 2 and "error" in err


def test_check_reports(capsys, monkeypatch):
    code, out, _ = run(["check", "--automaton", str(PACKAGE_DATA / "group3.json"), "--no-timestamp"], capsys, monkeypatch)
    report = json.loads(out)
    assert code == 0
    assert report["group"] and report["transitive"]
    assert len(report["recurrent"]) == 1 and report["recurrent"][0]["group"]
    assert "timestamp" not in report
    code, out, _ = run(["check", "--automaton", "builtin:ends_with_one"], capsys, monkeypatch)
    assert not json.loads(out)["group"] and "timestamp" in json.loads(out)


def test_check_errors(capsys, monkeypatch):
    code, _, err = run(["check", "--automaton", str(DATA / "partial.json")], capsys, monkeypatch)
    assert code == 2 and "b" in err
    code, _, err = run(["check", "--automaton", str(DATA / "missing.json")], capsys, monkeypatch)
    assert code == 2
    code, _, _ = run(["check", "--automaton", "builtin:nope"], capsys, monkeypatch)
    assert code == 2


def test_select_rejects_bad_symbol(capsys, monkeypatch):
    code, _, err = run(["select", "--automaton", "builtin:group3"], capsys, monkeypatch, "0120")
    assert code == 2 and "position 3" in err


def test_stats_json_and_csv(capsys, monkeypatch):
    text = format_digits(champernowne(2, 4096))
    code, out, _ = run(["stats", "--max-len", "2", "--no-timestamp"], capsys, monkeypatch, text)
    report = json.loads(out)
    assert code == 0 and report["config"]["max_len"] == 2
    code, out, _ = run(["stats", "--max-len", "2", "--format", "csv"], capsys, monkeypatch, text)
    lines = out.strip().splitlines()
    assert lines[0] == "word,length,count,frequency,ps_ratio"
    assert len(lines) == 1 + 2 + 4
    code, _, _ = run(["stats", "--max-len", "0"], capsys, monkeypatch, text)
    assert code == 2


def test_stats_deterministic(capsys, monkeypatch):
    text = format_digits(bernoulli(0.4, 2, 3000))
    argv = ["stats", "--max-len", "3", "--no-timestamp"]
    a = run(argv, capsys, monkeypatch, text)[1]
    b = run(argv, capsys, monkeypatch, text)[1]
    assert a == b


def test_compress_decode_and_outputs(capsys, monkeypatch, tmp_path):
    text = format_digits(bernoulli(0.9, 7, 20_000))
    out_bits, out_code = tmp_path / "bits.txt", tmp_path / "code.json"
    argv = [
        "compress", "--automaton", "builtin:group3", "--k", "4", "--m", "64",
        "--decode", "--debug-stages", "--out", str(out_bits), "--code-out", str(out_code), "--no-timestamp",
    ]
    code, out, _ = run(argv, capsys, monkeypatch, text)
    report = json.loads(out)
    assert code == 0
    assert report["ratio"] < 0.9
    bits = out_bits.read_text().strip()
    assert set(bits) <= {"0", "1"} and len(bits) == report["emitted_bits"]
    assert json.loads(out_code.read_text())["k"] == 4
    again = run(argv, capsys, monkeypatch, text)[1]
    assert again == out


def test_compress_rejects_short_m(capsys, monkeypatch):
    text = format_digits(bernoulli(0.9, 7, 2000))
    code, _, _ = run(["compress", "--automaton", "builtin:group3", "--k", "4", "--m", "2"], capsys, monkeypatch, text)
    assert code == 2


def test_augmented_report(capsys, monkeypatch):
    code, out, _ = run(["augmented", "--automaton", "builtin:group3", "--k", "2", "--no-timestamp"], capsys, monkeypatch)
    assert code == 0
    report = json.loads(out)
    assert report["config"]["k"] == 2
    text = format_digits(champernowne(2, 5000))
    code, out2, _ = run(["augmented", "--automaton", "builtin:group3", "--k", "1", "--stdin", "--no-timestamp"], capsys, monkeypatch, text)
    assert code == 0 and json.loads(out2)


def test_verify_exit_codes(capsys, monkeypatch):
    argv = ["verify", "--family-size", "5", "--max-len", "8", "--length", "2000", "--cases", "3", "--no-timestamp"]
    code, out, _ = run(argv, capsys, monkeypatch)
    assert code == 0 and json.loads(out)["status"] == "pass"
    code, out, _ = run(argv + ["--automaton", "builtin:ends_with_one"], capsys, monkeypatch)
    statuses = {s["name"]: s["status"] for s in json.loads(out)["suites"]}
    assert code == 0
    assert "hypothesis_unmet" in statuses.values() and "fail" not in statuses.values()


def test_paper_examples(capsys, monkeypatch):
    code, out, _ = run(["paper-examples", "--no-timestamp"], capsys, monkeypatch)
    report = json.loads(out)
    assert code == 0 and all(s["status"] == "pass" for s in report["suites"])


def test_seed_environment_override(capsys, monkeypatch):
    monkeypatch.setenv("NORMSEL_SEED", "5")
    a = run(["paper-examples", "--no-timestamp"], capsys, monkeypatch)[1]
    b = run(["paper-examples", "--no-timestamp", "--seed", "5"], capsys, monkeypatch)[1]
    assert json.loads(a)["suites"] == json.loads(b)["suites"]


def test_console_entry_point():
    exe = shutil.which("normsel")
    cmd = [exe] if exe else [sys.executable, "-m", "normsel"]
    res = subprocess.run(cmd + ["gen", "--kind", "periodic", "--pattern", "01", "--length", "6"], capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout.strip() == "010101"
