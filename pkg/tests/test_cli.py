import csv
import json
import math
import subprocess
import sys

import numpy as np
import pytest

from conftest import abs_net, random_host
from reluswap.activations import get_activation
from reluswap.cli import main
from reluswap.net_ir import ActivationRef, make_network, parse, serialize


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def abs_file(tmp_path):
    p = tmp_path / "abs.json"
    p.write_bytes(serialize(abs_net()))
    return p


# classify

def test_classify_softplus(capsys):
    code, out, _ = run(capsys, "classify", "--act", "softplus")
    doc = json.loads(out)
    assert code == 0 and doc["memberships"] == ["A2tilde"]
    assert doc["s_decomp"]["b1"] == pytest.approx(math.log(2), abs=1e-16)


def test_classify_relu2(capsys):
    code, out, _ = run(capsys, "classify", "--act", "relu2")
    assert code == 0 and json.loads(out)["memberships"] == ["A1k(1)"]


def test_classify_bad_parameter(capsys):
    code, out, err = run(capsys, "classify", "--act", "gelu", "--param", "sigma=-1")
    assert code == 2 and "ParameterDomainError" in err and out == ""


def test_classify_bad_parameter_json(capsys):
    code, out, _ = run(capsys, "classify", "--act", "gelu", "--param", "sigma=-1", "--json")
    assert code == 2 and json.loads(out)["error"] == "ParameterDomainError"


def test_classify_unknown_and_malformed(capsys):
    assert run(capsys, "classify", "--act", "nope")[0] == 2
    assert run(capsys, "classify", "--act", "elu", "--param", "alpha")[0] == 2
    assert run(capsys, "classify", "--act", "elu", "--param", "alpha=x")[0] == 2


# constants

def test_constants_all_rows_pass(capsys):
    code, out, _ = run(capsys, "constants", "--json")
    doc = json.loads(out)
    assert code == 0 and doc["pass"]
    assert {r["name"] for r in doc["rows"]} >= {"elu", "celu", "softplus", "gelu", "silu", "swish", "mish",
                                                "x_dsilu", "x_softsign_shift", "x_arctan_shift"}


@pytest.mark.parametrize("name, M_sup", [("softplus", math.log(2)), ("mish", 0.309), ("x_arctan_shift", 1 / math.pi)])
def test_constants_examples(capsys, name, M_sup):
    code, out, _ = run(capsys, "constants", name, "--json")
    row = json.loads(out)["rows"][0]
    assert code == 0 and row["pass"] and abs(row["M_sup"] - M_sup) < 1e-3


def test_constants_text_table(capsys):
    code, out, _ = run(capsys, "constants", "softplus")
    assert code == 0 and "softplus" in out and out.rstrip().endswith("pass")


def test_constants_not_single_neuron(capsys):
    code, _, err = run(capsys, "constants", "sigmoid")
    assert code == 2 and "NotA2tilde" in err


# curve

def read_curve(path):
    raw = path.read_bytes()
    assert b"\r" not in raw
    rows = list(csv.reader(raw.decode("ascii").splitlines()))
    assert rows[0] == ["x", "phi", "relu"]
    data = np.array([[float(v) for v in r] for r in rows[1:]])
    assert data.shape == (2001, 3)
    return data


def test_curve_softplus(capsys, tmp_path):
    out = tmp_path / "c.csv"
    code, _, _ = run(capsys, "curve", "--act", "softplus", "--K", "10", "--M", "2", "--out", str(out))
    data = read_curve(out)
    assert code == 0
    assert data[0, 0] == -2.0 and data[-1, 0] == 2.0
    assert np.max(np.abs(data[:, 1] - data[:, 2])) <= 0.0694


def test_curve_silu(capsys, tmp_path):
    out = tmp_path / "c.csv"
    run(capsys, "curve", "--act", "silu", "--K", "100", "--M", "5", "--out", str(out))
    data = read_curve(out)
    assert np.max(np.abs(data[:, 1] - data[:, 2])) <= 0.00278


def test_curve_relu_source(capsys, tmp_path):
    out = tmp_path / "c.csv"
    code, _, _ = run(capsys, "curve", "--act", "relu", "--out", str(out))
    data = read_curve(out)
    assert code == 0 and np.array_equal(data[:, 1], data[:, 2])


def test_curve_is_locale_independent(tmp_path):
    out = tmp_path / "c.csv"
    env = {"LC_ALL": "de_DE.UTF-8", "LANG": "de_DE.UTF-8", "PATH": "/usr/bin:/bin"}
    subprocess.run([sys.executable, "-m", "reluswap", "curve", "--act", "softplus", "--K", "10", "--out", str(out)],
                   check=True, env=env, capture_output=True)
    fields = out.read_text().splitlines()[1].split(",")
    assert len(fields) == 3 and "." in fields[0]
    [float(v) for v in fields]


# gadget

def test_gadget_relu_writes_network(capsys, tmp_path):
    out = tmp_path / "g.json"
    code, stdout, _ = run(capsys, "gadget", "--act", "softplus", "--M", "5", "--tol", "1e-2", "--out", str(out),
                          "--json")
    meta = json.loads(stdout)
    doc = json.loads(out.read_text())
    assert code == 0 and meta["width"] == 1 and meta["reported_error"] <= 1e-2
    assert doc["metadata"]["target"] == "ReLU"
    assert parse(out.read_bytes()).width == 1


@pytest.mark.parametrize("target, extra, width", [
    ("derivative", ["--k", "2", "--scale", "1e-2"], 3), ("identity", ["--scale", "1e-2"], 1),
    ("product", ["--scale", "1e-2"], 3),
])
def test_gadget_building_blocks(capsys, target, extra, width):
    code, out, _ = run(capsys, "gadget", "--act", "sigmoid", "--target", target, *extra, "--json")
    assert code == 0 and json.loads(out)["width"] == width


def test_gadget_needs_scale(capsys):
    assert run(capsys, "gadget", "--act", "sigmoid", "--target", "identity")[0] == 2


def test_gadget_unreachable_tolerance(capsys):
    code, out, _ = run(capsys, "gadget", "--act", "softsign", "--M", "10", "--tol", "1e-6", "--json")
    doc = json.loads(out)
    assert code == 1 and doc["error"] == "CalibrationFailed" and doc["best_error"] > 1e-6


# transpile and verify

def test_transpile_abs_to_gelu(capsys, tmp_path, abs_file):
    net_out, rep_out = tmp_path / "o.json", tmp_path / "r.json"
    code, _, _ = run(capsys, "transpile", "--in", str(abs_file), "--act", "gelu", "--A", "1", "--eps", "1e-2",
                     "--out", str(net_out), "--report", str(rep_out))
    rep = json.loads(rep_out.read_text())
    assert code == 0 and rep["factors"] == [1.0, 1.0] and rep["sup_error_sampled"] < 1e-2
    assert rep["seed"] == 0


def test_transpile_abs_to_sigmoid(capsys, tmp_path, abs_file):
    code, out, _ = run(capsys, "transpile", "--in", str(abs_file), "--act", "sigmoid", "--eps", "1e-2", "--json")
    rep = json.loads(out)
    assert code == 0 and rep["factors"][0] <= 3 and rep["factors"][1] <= 2


def test_transpile_tanh_host(capsys, tmp_path):
    p = tmp_path / "t.json"
    tanh = ActivationRef.of(get_activation("tanh"))
    p.write_bytes(serialize(make_network(1, [([[1.0]], [0.0], tanh), ([[1.0]], [0.0], "identity")])))
    code, _, err = run(capsys, "transpile", "--in", str(p), "--act", "softplus")
    assert code == 2 and "NotReLUHost" in err


def test_transpile_is_deterministic(capsys, tmp_path):
    p = tmp_path / "h.json"
    p.write_bytes(serialize(random_host(5)))
    outs = []
    for i in range(2):
        o = tmp_path / f"o{i}.json"
        run(capsys, "transpile", "--in", str(p), "--act", "sigmoid", "--seed", "3", "--out", str(o))
        outs.append(o.read_bytes())
    assert outs[0] == outs[1]


def test_verify_matches_report(capsys, tmp_path, abs_file):
    net_out = tmp_path / "o.json"
    _, out, _ = run(capsys, "transpile", "--in", str(abs_file), "--act", "softplus", "--seed", "9",
                    "--out", str(net_out), "--json")
    rep = json.loads(out)
    code, out, _ = run(capsys, "verify", "--a", str(abs_file), "--b", str(net_out), "--seed", "9", "--json")
    doc = json.loads(out)
    assert code == 0 and doc["sup_error_sampled"] == rep["sup_error_sampled"]
    assert doc["n_points"] == rep["n_verify_points"]


def test_verify_identical(capsys, abs_file):
    code, out, _ = run(capsys, "verify", "--a", str(abs_file), "--b", str(abs_file))
    assert code == 0 and "sampled sup distance 0.0" in out


def test_verify_dimension_mismatch(capsys, tmp_path, abs_file):
    p = tmp_path / "h.json"
    p.write_bytes(serialize(random_host(1)))
    code, _, err = run(capsys, "verify", "--a", str(abs_file), "--b", str(p))
    assert code == 2 and "DimensionMismatch" in err


def test_missing_file_and_bad_json(capsys, tmp_path):
    assert run(capsys, "verify", "--a", str(tmp_path / "none.json"), "--b", str(tmp_path / "none.json"))[0] == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{\n  \"input_dim\": 1,\n")
    code, _, err = run(capsys, "transpile", "--in", str(bad), "--act", "softplus")
    assert code == 2 and "ParseError" in err


def test_usage_errors_exit_two():
    r = subprocess.run([sys.executable, "-m", "reluswap"], capture_output=True)
    assert r.returncode == 2
    r = subprocess.run([sys.executable, "-m", "reluswap", "classify", "--act", "softplus"], capture_output=True)
    assert r.returncode == 0 and json.loads(r.stdout)["memberships"] == ["A2tilde"]
