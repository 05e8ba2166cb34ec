import json
import math
import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest

from conecontract.cli import main

MODELS = Path(__file__).resolve().parents[1] / "demos" / "models"


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def write(tmp_path, name, obj):
    p = tmp_path / name
    p.write_text(json.dumps(obj))
    return p


def test_measure_examples(capsys, tmp_path):
    reference = write(tmp_path, "a.json", [[-1.6857, 1.0143], [-0.4143, -0.3143]])
    code, out, _ = run(capsys, "measure", reference, "--p", "inf")
    d = json.loads(out)
    assert code == 0
    assert d["mu"] == pytest.approx(0.1, abs=1e-4) and d["mu_plus"] == pytest.approx(-0.3143, abs=1e-4)
    code, out, _ = run(capsys, "measure", write(tmp_path, "d.json", [[-1, 0], [0, -2]]), "--p", "1")
    assert json.loads(out)["mu_plus"] == pytest.approx(-1.0)
    code, out, _ = run(capsys, "measure", write(tmp_path, "i.json", np.eye(3).tolist()), "--p", "3",
                       "--weight", "diag:1,2,3")
    assert json.loads(out)["mu_plus"] == pytest.approx(1.0, abs=1e-6)


def test_measure_general_weight_and_oracle(capsys, tmp_path):
    R = write(tmp_path, "R.json", [[4.0, 3.0], [3.0, 3.0]])
    A = write(tmp_path, "A.json", [[-1.0, 0.5], [1.0, -1.0]])
    code, out, _ = run(capsys, "measure", A, "--p", "inf", "--weight", f"general:{R}", "--oracle",
                       "--samples", "500")
    d = json.loads(out)
    assert code == 0 and d["bound"] == "upper"
    assert d["mu_plus_sampled_lower"] <= d["mu_plus"] + 1e-12
    assert d["oracle"] == pytest.approx(d["mu_plus_sampled_lower"], abs=1e-3)


def test_deterministic_output(capsys, tmp_path):
    args = ("certify", MODELS / "linear_metzler.json", "--p", "2", "--rate", "-0.2",
            "--condition", "ordered_one_sided_lipschitz", "--samples", "200", "--seed", "11")
    first = run(capsys, *args)[1]
    assert first == run(capsys, *args)[1]
    assert json.loads(first)["seed"] == 11


def test_certify_exit_codes(capsys):
    lin = MODELS / "linear_metzler.json"
    assert run(capsys, "certify", lin, "--p", "1", "--rate", "-0.5", "--samples", "100")[0] == 0
    code, out, _ = run(capsys, "certify", lin, "--p", "1", "--rate", "-0.9", "--samples", "100")
    assert code == 1 and json.loads(out)["verdict"] == "refuted"
    assert run(capsys, "certify", lin, "--condition", "nope", "--rate", "1")[0] == 2
    assert run(capsys, "certify", lin, "--condition", "dini_contraction")[0] == 2
    assert run(capsys, "certify", MODELS / "missing.json", "--rate", "1")[0] == 2


def test_certify_model_families(capsys):
    code, out, _ = run(capsys, "certify", MODELS / "separable_monotone.json", "--condition",
                       "separable", "--p", "1", "--rate", "-1.0", "--samples", "200")
    assert code == 0 and json.loads(out)["condition_id"] == "separable_monotone_incremental"
    code, out, _ = run(capsys, "certify", MODELS / "hopfield_two_neuron.json", "--p", "inf",
                       "--samples", "200")
    assert code == 0 and json.loads(out)["c"] == pytest.approx(0.5)
    code, out, _ = run(capsys, "certify", MODELS / "comparison.json", "--p", "1", "--rate", "-1.5",
                       "--samples", "200")
    assert code == 0 and json.loads(out)["evidence"]["c"] == pytest.approx(1.5)
    # dissipation 2 minus gain 0.5 caps the rate at 1.5
    assert run(capsys, "certify", MODELS / "comparison.json", "--p", "1", "--rate", "-2.0",
               "--samples", "200")[0] == 1


def test_simulate_linear_decay_csv(capsys, tmp_path):
    model = write(tmp_path, "m.json", {"type": "linear", "A": [[-1.0, 0.0], [0.0, -2.0]]})
    code, out, _ = run(capsys, "simulate", model, "--x0", "1,1", "--horizon", "2", "--format", "csv")
    rows = out.strip().splitlines()
    assert code == 0 and rows[0].startswith("t,x1,x2,norm")
    for row in rows[1:]:
        t, x1, x2 = map(float, row.split(",")[:3])
        assert x1 == pytest.approx(math.exp(-t), abs=1e-7) and x2 == pytest.approx(math.exp(-2 * t), abs=1e-7)


def test_simulate_equilibrium_rows_constant(capsys):
    code, out, _ = run(capsys, "simulate", MODELS / "hopfield_two_neuron.json", "--x0", "0,0",
                       "--format", "csv")
    rows = [r.split(",")[1:] for r in out.strip().splitlines()[1:]]
    assert code == 0 and all(r == rows[0] for r in rows)


def test_simulate_hopfield_pair_distance_under_envelope(capsys):
    code, out, _ = run(capsys, "simulate", MODELS / "hopfield_two_neuron.json", "--x0", "2,-1",
                       "--x0=-1,1.5", "--p", "2", "--rate", "-0.5", "--horizon", "8")
    d = json.loads(out)
    dist, env = np.array(d["distance"]), np.array(d["envelope"])
    assert code == 0
    assert np.all(np.diff(dist) <= 1e-12) and np.all(dist <= env * (1 + 1e-6))


def test_simulate_input_errors(capsys):
    assert run(capsys, "simulate", MODELS / "linear_metzler.json", "--x0", "1,2,3")[0] == 2
    assert run(capsys, "simulate", MODELS / "linear_metzler.json", "--x0", "a,b")[0] == 2


def test_numerical_failure_exit_code(capsys, tmp_path):
    model = write(tmp_path, "blow.json", {"type": "linear", "A": [[60.0]]})
    assert run(capsys, "simulate", model, "--x0", "1", "--horizon", "100")[0] == 3


def test_hopfield_command(capsys, tmp_path):
    code, out, _ = run(capsys, "hopfield", MODELS / "hopfield_two_neuron.json", "--p", "2",
                       "--equilibrium", "0.1,0.1", "--samples", "200")
    d = json.loads(out)
    assert code == 0 and d["equilibrium"]["residual"] <= 1e-10
    strong = write(tmp_path, "h.json", {"type": "hopfield", "Lambda": [1, 1], "T": [[0, 1], [1, 0]],
                                        "activations": [{"kind": "tanh_like", "a": 2.0, "k": 1}] * 2})
    code, out, _ = run(capsys, "hopfield", strong)
    assert code == 1 and json.loads(out)["verdict"] == "no-certificate"
    assert run(capsys, "hopfield", MODELS / "linear_metzler.json")[0] == 2


def test_iss_command(capsys, tmp_path):
    model = MODELS / "comparison.json"
    out_path = tmp_path / "iss.csv"
    code, _, _ = run(capsys, "iss", model, "--rate", "1.0", "--input", "0.3,0.1", "--x0", "2,1",
                     "--samples", "200", "--format", "csv", "--out", out_path)
    assert code == 0 and out_path.read_text().startswith("t,x1,x2,norm,envelope1")
    assert run(capsys, "iss", model, "--rate", "2.0", "--samples", "200")[0] == 1
    assert run(capsys, "iss", model)[0] == 2


def test_selftest_mutation_surfaces_failure(capsys):
    code, out, _ = run(capsys, "selftest", "--quick", "--mutate-closed-forms", "0.01")
    assert code == 1
    assert out.splitlines()[0].startswith("[FAIL]  0.")


def test_selftest_quick_under_a_minute():
    t0 = time.perf_counter()
    proc = subprocess.run([sys.executable, "-m", "conecontract.cli", "selftest", "--quick"],
                          capture_output=True, text=True, timeout=120)
    assert time.perf_counter() - t0 < 60
    lines = [l for l in proc.stdout.splitlines() if l.startswith("[")]
    assert lines[0].startswith("[PASS]  0.")
    assert "criteria passed" in proc.stdout


def test_hidden_flag_not_in_help(capsys):
    with pytest.raises(SystemExit):
        main(["selftest", "--help"])
    assert "mutate" not in capsys.readouterr().out
