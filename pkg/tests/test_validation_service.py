import json
import math

import numpy as np
import pytest

from src.cr_determinant.services.model_service import ModelService
from src.cr_determinant.services.validation_service import ValidationService
from exceptions import ConfigException, ModelSchemaException
from config import Config


@pytest.fixture
def service():
    return ValidationService()


@pytest.fixture
def model_data():
    with open(Config.SYNTHETIC_MODEL_FILE, "r", encoding="utf-8") as f:
        return json.load(f)


@pytest.fixture
def write_model(tmp_path):
    def _write(data, name="model.json"):
        path = tmp_path / name
        path.write_text(data if isinstance(data, str) else json.dumps(data), encoding="utf-8")
        return path
    return _write


# Run configuration
def test_defaults_resolve(service):
    run = service.resolve_run_config()
    assert run.degree == Config.DEFAULT_DEGREE
    assert (run.n_eta, run.n_xi) == (16, 40)
    assert run.mu is None
    assert run.uses_sphere
    assert run.output_format == "json"


def test_config_file_then_command_line(service, tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("# run settings\ndegree = 3\nc2 = 2.5  # trailing comment\ngrid = 8x20\n\nseed=7\n")
    run = service.resolve_run_config({"degree": 5, "seed": None}, path)
    assert run.degree == 5
    assert run.c2 == 2.5
    assert (run.n_eta, run.n_xi) == (8, 20)
    assert run.seed == 7


@pytest.mark.parametrize("raw, expected", [("16x40", (16, 40)), ("12,32", (12, 32)), ("4X8", (4, 8))])
def test_parse_grid(service, raw, expected):
    grid = service.parse_grid(raw)
    assert (grid["n_eta"], grid["n_xi"]) == expected


@pytest.mark.parametrize("raw", ["16", "16x40x2", "ax4"])
def test_parse_grid_rejects(service, raw):
    with pytest.raises(ConfigException):
        service.parse_grid(raw)


def test_config_file_errors_carry_line_numbers(service, tmp_path):
    path = tmp_path / "bad.cfg"
    path.write_text("degree = 3\nthis line has no separator\n")
    with pytest.raises(ConfigException, match=r"bad.cfg:2"):
        service.read_config_file(path)

    path.write_text("colour = blue\n")
    with pytest.raises(ConfigException, match="unknown key"):
        service.read_config_file(path)

    path.write_text("degree = three\n")
    with pytest.raises(ConfigException, match="cannot parse"):
        service.read_config_file(path)


def test_missing_config_file(service, tmp_path):
    with pytest.raises(ConfigException):
        service.read_config_file(tmp_path / "absent.cfg")


@pytest.mark.parametrize("overrides, fragment", [
    ({"degree": 0}, "degree must be at least 1"),
    ({"degree": 41}, "degree must be at most"),
    ({"grid": "2x40"}, "n_eta"),
    ({"kappa": 0.0}, "kappa must be positive"),
    ({"c2": -1.0}, "c2 must be positive"),
    ({"c3": -0.1}, "c3 must be nonnegative"),
    ({"mu": 0.0}, "mu must be positive"),
    ({"max_iter": 0}, "max_iter"),
    ({"memory": -1}, "memory"),
    ({"format": "xml"}, "format"),
])
def test_invalid_run_values(service, overrides, fragment):
    with pytest.raises(ConfigException, match=fragment):
        service.resolve_run_config(overrides)


def test_all_issues_are_reported(service):
    values = dict(service.defaults(), degree=0, c3=-1.0)
    assert len(service.validate_run_config(values)) == 2


# Synthetic models
def test_bundled_model_is_valid(service, model_data):
    assert service.validate_synthetic_model(model_data) == []


def test_missing_field(service, model_data):
    del model_data["A"]
    assert service.validate_synthetic_model(model_data) == ["Missing field 'A'"]


def test_bad_dim(service, model_data):
    model_data["dim"] = 1
    assert "dim must be an integer" in service.validate_synthetic_model(model_data)[0]


def test_shape_mismatch(service, model_data):
    model_data["weights"] = [1.0] * 5
    issues = service.validate_synthetic_model(model_data)
    assert any("weights has shape" in issue for issue in issues)


def test_nonpositive_weights(service, model_data):
    model_data["weights"][2] = 0.0
    assert service.validate_synthetic_model(model_data) == ["weights must be positive"]


def test_asymmetric_operator(service, model_data):
    model_data["A"][0][1] = -5.0
    issues = service.validate_synthetic_model(model_data)
    assert "W A must be symmetric" in issues


def test_negative_spectrum_and_kernel(service, model_data):
    model_data["Delta_b"] = (-np.array(model_data["Delta_b"])).tolist()
    issues = service.validate_synthetic_model(model_data)
    assert any("Delta_b has a negative eigenvalue" in issue for issue in issues)

    model_data = dict(model_data, A=(np.array(model_data["A"]) + np.eye(6)).tolist())
    issues = service.validate_synthetic_model(model_data)
    assert "constants must lie in the kernel of A" in issues


def test_non_numeric_total(service, model_data):
    model_data["Qprime_total"] = "zero"
    assert "Qprime_total must be a number" in service.validate_synthetic_model(model_data)


# Loading
def test_load_bundled_model():
    model = ModelService().load_synthetic()
    assert model.dim == 6
    assert model.a == 0.0
    assert model.volume == pytest.approx(6.0)


def test_model_spectrum():
    service = ModelService()
    model = service.load_synthetic()
    np.testing.assert_allclose(service.eigenvalues(model), [0, 3, 3, 15, 15, 24], atol=1e-10)
    spectrum = service.spectrum(model)
    assert spectrum.kernel_dim == 1
    np.testing.assert_array_equal(spectrum.multiplicities, [2, 2, 1])


def test_load_reports_json_position(write_model):
    path = write_model('{\n  "dim": 6,\n  "weights": [1, 2,]\n}')
    with pytest.raises(ModelSchemaException) as error:
        ModelService().load_synthetic(path)
    assert error.value.diagnostics[0].startswith("line 3")


def test_load_missing_and_empty(write_model, tmp_path):
    with pytest.raises(ModelSchemaException, match="file not found"):
        ModelService().load_synthetic(tmp_path / "absent.json")
    with pytest.raises(ModelSchemaException, match="file is empty"):
        ModelService().load_synthetic(write_model("  \n"))


def test_load_rejects_invalid_content(write_model, model_data):
    model_data["weights"][0] = -1.0
    with pytest.raises(ModelSchemaException) as error:
        ModelService().load_synthetic(write_model(model_data))
    assert error.value.diagnostics == ["weights must be positive"]


def test_model_lambda_from_loaded_file(write_model, model_data):
    from src.cr_determinant.services.extremal_service import ExtremalService
    model = ModelService().load_synthetic(write_model(model_data))
    assert ExtremalService().best_constant_lambda(model=model) == pytest.approx(math.sqrt(3) / 2)
