import csv
import io
import json
import math

import pytest

import main
from config import Config

FAST = ["--degree", "2", "--grid", "8x20"]


@pytest.fixture
def run(capsys):
    def _run(*argv):
        code = main.main(list(argv))
        captured = capsys.readouterr()
        return code, captured.out, captured.err
    return _run


@pytest.fixture
def model_path():
    return str(Config.SYNTHETIC_MODEL_FILE)


# spectrum
def test_spectrum_levels(run):
    code, out, err = run("spectrum", *FAST)
    assert code == 0
    payload = json.loads(out)
    assert payload["schema"] == Config.SCHEMA_VERSION
    assert payload["command"] == "spectrum"
    assert payload["config"]["degree"] == 2
    levels = payload["results"]["levels"]
    assert [(row["j"], row["lambda"], row["multiplicity"]) for row in levels] == [(1, 2.0, 4), (2, 6.0, 6)]
    assert payload["results"]["matrix_levels_match"] is True
    assert "matrix_A levels: PASS" in err
    assert "P'/A = 4" in err


def test_spectrum_kappa_normalization(run):
    code, out, _ = run("spectrum", *FAST, "--kappa", "4")
    assert code == 0
    rows = json.loads(out)["results"]["pprime_normalization"]
    assert all(row["ratio"] == pytest.approx(1.0) for row in rows)


def test_spectrum_of_model(run, model_path):
    code, out, _ = run("spectrum", "--model", model_path)
    assert code == 0
    results = json.loads(out)["results"]
    assert results["kernel_dim"] == 1
    assert [row["multiplicity"] for row in results["levels"]] == [2, 2, 1]


def test_degree_zero_is_usage_error(run):
    code, out, _ = run("spectrum", "--degree", "0")
    assert code == 2
    assert out == ""


def test_bad_argument_is_usage_error(run):
    code, _, _ = run("maximize", "--init", "sideways")
    assert code == 2


# zeta
def test_zeta_index_check(run):
    code, out, err = run("zeta", "--s", "0")
    assert code == 0
    assert "index check: PASS" in err
    results = json.loads(out)["results"]
    assert results["zeta_zero"] == pytest.approx(-5.0 / 3.0, abs=1e-10)
    assert results["det"] == pytest.approx(math.exp(-results["zeta_prime_zero"]))


def test_zeta_scaling_and_agreement(run):
    code, out, err = run("zeta", "--s", "2", "--scale", "2")
    assert code == 0
    assert "det scaling (c=2): PASS" in err
    assert "agreement: PASS" in err
    row = json.loads(out)["results"]["values"][0]
    assert row["agreement_pass"] is True


def test_zeta_pole_is_usage_error(run):
    code, _, _ = run("zeta", "--s", "1")
    assert code == 2


def test_zeta_of_model(run, model_path):
    code, out, _ = run("zeta", "--model", model_path, "--s", "1")
    assert code == 0
    results = json.loads(out)["results"]
    assert results["zeta_zero"] == 5.0
    assert "index_check" not in results


# polyakov
def test_polyakov_zero(run):
    code, out, _ = run("polyakov", "--degree", "1", "--grid", "8x20")
    assert code == 0
    report = json.loads(out)["results"]["report"]
    assert abs(report["F"]) < 1e-12
    assert abs(report["A1"]) < 1e-12


def test_polyakov_constant(run):
    code, out, err = run("polyakov", "--degree", "1", "--grid", "8x20", "--w=0.5,0,0,0,0")
    assert code == 0
    assert "constant w: A1 = 80 pi^2 c PASS" in err
    results = json.loads(out)["results"]
    assert results["report"]["A1"] == pytest.approx(40 * math.pi ** 2)
    assert results["constant_A1_check"]["pass"] is True


def test_polyakov_from_terms_file(run, tmp_path):
    path = tmp_path / "w.json"
    path.write_text(json.dumps({"terms": [{"z1": 1, "re": 0.1}, {"z1bar": 1, "re": 0.1}]}))
    code, out, _ = run("polyakov", "--degree", "1", "--grid", "8x20", "--w-file", str(path))
    assert code == 0
    results = json.loads(out)["results"]
    assert results["w"][1] == pytest.approx(0.2)
    assert results["report"]["A2"] == pytest.approx(-(8 * math.pi ** 2 / 3) * 1e-4, rel=1e-9)
    assert results["report"]["cocycle_A1"] < 1e-6


@pytest.mark.parametrize("w", ["--w=1+2j,0,0,0,0", "--w=1,2"])
def test_polyakov_rejects_bad_coefficients(run, w):
    code, out, _ = run("polyakov", "--degree", "1", "--grid", "8x20", w)
    assert code == 2
    assert out == ""


def test_polyakov_rejects_non_pluriharmonic_terms(run, tmp_path):
    path = tmp_path / "w.json"
    path.write_text(json.dumps({"terms": [{"z1": 1, "z1bar": 1, "re": 1.0}]}))
    code, _, _ = run("polyakov", "--degree", "2", "--grid", "8x20", "--w-file", str(path))
    assert code == 2


# maximize
def test_maximize_refuses_infeasible_sphere(run):
    code, out, err = run("maximize", *FAST)
    assert code == 2
    assert "condition (cond): INFEASIBLE (a=1)" in err
    assert "refusing to maximize" in err
    assert json.loads(out)["results"]["feasibility"]["feasible"] is False


def test_maximize_forced_writes_trace(run, tmp_path):
    out_path = tmp_path / "run.json"
    code, out, _ = run("maximize", "--c2", "1", "--c3", "0", "--force", "--init", "random",
                       "--out", str(out_path))
    assert code == 0
    assert out == ""
    payload = json.loads(out_path.read_text())
    assert payload["config"]["grad_tol"] == Config.ASCENT_GRAD_TOL
    ascent = payload["results"]["ascent"]
    assert ascent["converged"] is True
    assert ascent["stop_reason"] in ("stalled", "stagnant")
    assert ascent["monotone"] is True
    assert ascent["F"] <= 1e-8
    assert ascent["w_norm"] < 1e-4
    assert ascent["el_residual"] < 1e-6
    with open(tmp_path / "run_trace.csv", newline="") as f:
        rows = list(csv.DictReader(f))
    assert list(rows[0]) == ["iteration", "F", "grad_norm", "step", "sup_coeff"]
    assert int(rows[-1]["iteration"]) == ascent["iterations"]


def test_maximize_non_convergence(run, tmp_path):
    out_path = tmp_path / "run.json"
    code, _, _ = run("maximize", *FAST, "--force", "--init", "random", "--max-iter", "1",
                     "--grad-tol", "1e-14", "--out", str(out_path))
    assert code == 3
    assert not out_path.exists()
    assert (tmp_path / "run_trace.csv").exists()


def test_maximize_model_feasibility(run, model_path):
    code, _, err = run("maximize", "--model", model_path, "--mu", "0.3333333333333333", "--c3", "1e-3")
    assert code == 0
    assert "condition (cond): FEASIBLE (a=0)" in err

    code, _, err = run("maximize", "--model", model_path, "--c3", "1e-3")
    assert code == 2
    assert "INFEASIBLE" in err


def test_maximize_hypothesis_violation(run):
    code, _, _ = run("maximize", *FAST, "--c2", "-1")
    assert code == 2


# verify
def test_verify_subset(run):
    code, out, err = run("verify", *FAST, "--suite", "calibration,zeta_index,det_scaling")
    assert code == 0
    assert "calibration: PASS" in err
    assert "3/3 suites passed" in err
    assert json.loads(out)["results"]["all_passed"] is True


def test_verify_unknown_suite(run):
    code, _, _ = run("verify", "--suite", "nonsense")
    assert code == 2


def test_verify_corrupted_model(run, tmp_path):
    path = tmp_path / "broken.json"
    path.write_text('{"dim": 6, "weights": [1, 1,')
    code, out, err = run("verify", "--model", str(path))
    assert code == 2
    assert "schema: FAIL" in err
    assert json.loads(out)["results"]["suites"][0]["name"] == "schema"


# config file and formats
def test_config_file_layering(run, tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("degree = 3\ngrid = 8x20\n")
    code, out, _ = run("spectrum", "--config", str(path), "--degree", "1")
    assert code == 0
    config = json.loads(out)["config"]
    assert config["degree"] == 1
    assert (config["n_eta"], config["n_xi"]) == (8, 20)


def test_output_is_deterministic(run, tmp_path):
    first, second = tmp_path / "a.json", tmp_path / "b.json"
    run("polyakov", "--degree", "2", "--grid", "8x20", "--random", "--seed", "4", "--out", str(first))
    run("polyakov", "--degree", "2", "--grid", "8x20", "--random", "--seed", "4", "--out", str(second))
    assert first.read_bytes() == second.read_bytes()


def test_csv_format(run):
    code, out, _ = run("spectrum", *FAST, "--format", "csv")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    values = {row["key"]: row["value"] for row in rows}
    assert values["command"] == "spectrum"
    assert values["results.levels[0].lambda"] == "2.0"
