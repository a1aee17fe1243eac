"""Golden-file tests for the command line.

Each case records the exit code, stdout and stderr of one invocation in
``tests/golden/<name>.txt``.  Set ``QHOL_UPDATE_GOLDEN=1`` to rewrite the
files after an intentional output change, then review the diff.
"""

import json
import os
import subprocess
import sys
from pathlib import Path

import pytest

from qhol.cli import main

GOLDEN = Path(__file__).parent / "golden"
UPDATE = os.environ.get("QHOL_UPDATE_GOLDEN") == "1"

CASES = {
    "verify_qpoch": (["verify", "(1-q*M)*L - (1-q*M)^2", "qpoch(n)", "--window", "-4..8"], 0),
    "verify_qpoch_json": (["verify", "(1-q*M)*L - (1-q*M)^2", "qpoch(n)", "--window", "-4..8", "--json"], 0),
    "verify_mismatch": (["verify", "L - q", "alt(n)", "--window", "-2..2"], 1),
    "eval_delta": (["eval", "delta(n)", "--at", "n=0"], 0),
    "eval_multisum_window": (["eval", "sum(k=0..n, qbinom(n,k) * (-1)^k * qtri(k))", "--window", "0..4"], 0),
    "guess_qpow2": (["guess", "qpow2(n)", "--order", "1", "--mdeg", "2"], 0),
    "guess_qpow2_json": (["guess", "qpow2(n)", "--order", "1", "--mdeg", "2", "--json"], 0),
    "guess_cube_none": (["guess", "q^(n^3)", "--order", "1", "--mdeg", "2"], 1),
    "prove_equal_witness": (["prove-equal", "qpow(n)", "alt(n)"], 1),
    "prove_equal_claim_json": (["prove-equal", "qpoch(n)*qpochinv(n)", "heaviside(n)", "--json"], 0),
    "closure_sum": (["closure", "sum", "qpow(n)", "alt(n)"], 0),
    "closure_subst": (["closure", "subst", "qpoch(n)", "--map", "n -> n - k", "--to", "n,k"], 0),
    "telescope_check_json": (["telescope", "(-1)^k*qtri(k)*qbinom(n,k)", "--vars", "n,k", "--check", "--json"], 0),
    "dim_cex_json": (["dim", "cex(n,k)", "--json"], 0),
    "classify_qpoch_json": (["classify", "qpoch(n)", "--json"], 0),
    "fourier_qpow": (["fourier", "qpow(n)", "--window", "-3..3", "--op", "L"], 0),
    "usage_syntax_error": (["eval", "qpoch(n", "--at", "n=0"], 2),
    "usage_undeclared_json": (["eval", "qpoch(m)", "--vars", "n", "--at", "n=0", "--json"], 2),
    "usage_unknown_command": (["frobnicate"], 2),
    "usage_empty_window": (["eval", "qpow(n)", "--window", "5..1"], 2),
}


def run(argv, capsys):
    code = main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def render(code, out, err):
    return f"exit: {code}\n--- stdout\n{out}--- stderr\n{err}"


@pytest.mark.parametrize("name", sorted(CASES))
def test_golden(name, capsys):
    argv, expected_code = CASES[name]
    code, out, err = run(argv, capsys)
    assert code == expected_code
    text = render(code, out, err)
    path = GOLDEN / f"{name}.txt"
    if UPDATE:
        path.write_text(text)
    assert path.read_text() == text


@pytest.mark.parametrize("name", sorted(n for n in CASES if n.endswith("json")))
def test_json_is_byte_identical_across_runs(name, capsys):
    argv, _ = CASES[name]
    first = run(argv, capsys)[1]
    second = run(argv, capsys)[1]
    assert first == second
    doc = json.loads(first)
    assert doc["schema"] == "qhol/1"


def test_verify_residuals_all_zero(capsys):
    code, out, _ = run(CASES["verify_qpoch_json"][0], capsys)
    doc = json.loads(out)
    assert code == 0
    assert doc["residuals"] and all(r["residual"] == "0" for r in doc["residuals"])


def test_eval_delta_prints_one(capsys):
    assert run(["eval", "delta(n)", "--at", "n=0"], capsys)[1] == "1\n"


def test_guess_prints_operator(capsys):
    out = run(["guess", "qpow2(n)", "--order", "1", "--mdeg", "2"], capsys)[1]
    assert "L - q*M^2" in out


def test_config_file_is_merged_under_flags(tmp_path, capsys):
    cfg = tmp_path / "session.toml"
    cfg.write_text('seed = 3\nwindow = "0..2"\n\n[guess]\norder = 1\nmdeg = 2\n')
    code, out, _ = run(["eval", "qpow(n)", "--config", str(cfg), "--json"], capsys)
    assert code == 0
    doc = json.loads(out)
    assert [v["point"] for v in doc["values"]] == [[0], [1], [2]]
    code, out, _ = run(["eval", "qpow(n)", "--config", str(cfg), "--window", "5..5", "--json"], capsys)
    assert [v["point"] for v in json.loads(out)["values"]] == [[5]]


def test_console_script_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "qhol.cli", "eval", "delta(n)", "--at", "n=0"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0 and proc.stdout == "1\n"
