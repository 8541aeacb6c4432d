import csv
import io
import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from jmdecohere.cli import EXIT_INDETERMINATE, EXIT_INPUT, EXIT_OK, main
from jmdecohere.dynamics import depolarize, gkls_generator
from jmdecohere.formats import dumps, generator_to_dict, observable_to_dict, verdict_from_dict, verdict_to_dict
from jmdecohere.jmcheck import example_f
from jmdecohere.observables import Observable, bloch_observable
from jmdecohere.spinboson import block_projection, full_generator

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def write(path, doc):
    path.write_text(dumps(doc))
    return path


def test_check_commuting(capsys):
    code, out, _ = run(capsys, "check", CONFIGS / "sigma3.json", CONFIGS / "sigma3.json")
    doc = json.loads(out)
    assert code == EXIT_OK
    assert doc["verdict"]["status"] == "Compatible"
    assert doc["verdict"]["criterion"] == "commuting"


def test_check_sharp_pair(capsys):
    code, out, _ = run(capsys, "check", CONFIGS / "sigma1.json", CONFIGS / "sigma3.json")
    doc = json.loads(out)
    assert code == EXIT_OK
    assert doc["verdict"]["status"] == "Incompatible"
    assert doc["verdict"]["criterion"] == "busch"
    assert doc["criteria"]["tradeoff_necessary"] == "violated"


def test_check_boundary_pair_is_indeterminate(tmp_path, capsys):
    # three-outcome split keeps the qubit criterion out of play
    r = 1 / np.sqrt(2) + 1e-4
    A = depolarize(bloch_observable([1, 0, 0]), -np.log(r)).effects
    E = Observable([A[0] / 2, A[0] / 2, A[1]])
    F = depolarize(bloch_observable([0, 0, 1]), -np.log(r))
    a = write(tmp_path / "a.json", observable_to_dict(E))
    b = write(tmp_path / "b.json", observable_to_dict(F))
    code, out, _ = run(capsys, "check", a, b, "--max-iter", 5)
    assert code == EXIT_INDETERMINATE
    assert json.loads(out)["verdict"]["status"] == "Indeterminate"
    code, out, _ = run(capsys, "check", a, b)
    assert code == EXIT_OK and json.loads(out)["verdict"]["status"] == "Incompatible"


def test_check_certificate_round_trip(capsys):
    code, out, _ = run(capsys, "check", CONFIGS / "unsharp_x.json", CONFIGS / "unsharp_y.json", "--emit-certificate")
    doc = json.loads(out)["verdict"]
    assert code == EXIT_OK and "certificate" in doc
    assert verdict_to_dict(verdict_from_dict(doc), certificate=True) == doc


def test_check_input_errors(tmp_path, capsys):
    code, _, err = run(capsys, "check", tmp_path / "missing.json", CONFIGS / "sigma1.json")
    assert code == EXIT_INPUT and "error" in err
    bad = write(tmp_path / "bad.json", {"effects": [[[[1.2, 0], [0, 0]], [[0, 0], [1, 0]]], [[[-0.2, 0], [0, 0]], [[0, 0], [0, 0]]]]})
    code, _, _ = run(capsys, "check", bad, CONFIGS / "sigma1.json")
    assert code == EXIT_INPUT
    code, _, _ = run(capsys, "check", CONFIGS / "sigma1.json")
    assert code == EXIT_INPUT


def test_check_is_deterministic(capsys):
    args = ("check", CONFIGS / "unsharp_x.json", CONFIGS / "unsharp_y.json", "--emit-certificate")
    _, first, _ = run(capsys, *args)
    _, second, _ = run(capsys, *args)
    assert first == second


def test_critical_time_dephasing(capsys):
    code, out, _ = run(capsys, "critical-time", CONFIGS / "dephasing_gamma1.json", CONFIGS / "sigma1.json", CONFIGS / "sigma2.json")
    doc = json.loads(out)
    assert code == EXIT_OK
    assert abs(float(doc["t_star"]) - np.log(2) / 2) <= 1e-4
    assert np.isclose(float(doc["closed_forms"]["dephasing_closed_form"]), np.log(2) / 2)


def test_critical_time_already_compatible(capsys):
    code, out, _ = run(capsys, "critical-time", CONFIGS / "dephasing_gamma1.json", CONFIGS / "unsharp_x.json", CONFIGS / "unsharp_y.json", "--format", "csv")
    row = next(csv.DictReader(io.StringIO(out)))
    assert code == EXIT_OK and float(row["t_star"]) == 0.0


def test_critical_time_decoherence_free(tmp_path, capsys):
    gen = write(tmp_path / "g.json", generator_to_dict(full_generator(2, 1.0).to_generator()))
    plus = np.array([0, 1, 1, 0]) / np.sqrt(2)
    plus_i = np.array([0, 1, 1j, 0]) / np.sqrt(2)
    A, B = np.outer(plus, plus.conj()), np.outer(plus_i, plus_i.conj())
    a = write(tmp_path / "a.json", observable_to_dict(Observable([A, np.eye(4) - A])))
    b = write(tmp_path / "b.json", observable_to_dict(Observable([B, np.eye(4) - B])))
    code, out, _ = run(capsys, "critical-time", gen, a, b, "--t-max", 10)
    assert code == EXIT_OK and json.loads(out)["t_star"] == "none-within-t_max"


def test_critical_time_not_divisible(tmp_path, capsys):
    doc = generator_to_dict(gkls_generator(np.zeros((2, 2)), [np.diag([0.5, -0.5])], divisible=False))
    gen = write(tmp_path / "g.json", doc)
    code, _, err = run(capsys, "critical-time", gen, CONFIGS / "sigma1.json", CONFIGS / "sigma2.json")
    assert code == EXIT_INPUT and "divisible" in err


def test_example_nonmarkov(capsys):
    code, out, _ = run(capsys, "example-nonmarkov", "--grid", 21)
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == EXIT_OK and len(rows) == 21
    for r in rows:
        t = float(r["t"])
        assert np.isclose(float(r["f"]), example_f(t))
        assert (r["verdict"] == "Compatible") == (example_f(t) >= 0)
    code, out, _ = run(capsys, "example-nonmarkov", "--grid", 3, "--format", "json")
    roots = [float(x) for x in json.loads(out)["roots"]]
    assert abs(roots[0] - 0.196) <= 1e-3 and abs(roots[1] - 0.804) <= 1e-3


def test_phase_diagram(tmp_path, capsys):
    out_path = tmp_path / "pd.csv"
    code, _, _ = run(capsys, "phase-diagram", "--n", 2, "--grid", 6, "-o", out_path)
    rows = list(csv.DictReader(out_path.open()))
    assert code == EXIT_OK and len(rows) == 36
    assert list(rows[0]) == ["lambda", "alpha", "verdict", "residual", "theta_bound", "hellinger_bound"]
    assert all(r["verdict"] == "Compatible" for r in rows if float(r["alpha"]) == 0.0)
    code, _, _ = run(capsys, "phase-diagram", "--n", 13)
    assert code == EXIT_INPUT
    code, _, _ = run(capsys, "phase-diagram", "--grid", -3)
    assert code == EXIT_INPUT


def test_random_pair_seeded(capsys):
    _, a, _ = run(capsys, "random-pair", "--seed", 7)
    _, b, _ = run(capsys, "random-pair", "--seed", 7)
    assert a == b


def test_module_entry_point():
    res = subprocess.run(
        [sys.executable, "-m", "jmdecohere", "check", str(CONFIGS / "sigma1.json"), str(CONFIGS / "sigma3.json"), "--format", "csv"],
        capture_output=True, text=True, check=False,
    )
    assert res.returncode == 0
    assert res.stdout.splitlines()[1].startswith("Incompatible,busch")
