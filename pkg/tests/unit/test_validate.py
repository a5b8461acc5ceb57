import copy

import pytest

from pyxbar.errors import InvalidDesign, UnsupportedSchemaVersion
from pyxbar.validate import (
    DESIGN_SCHEMA,
    PyxbarValidator,
    validate_design_document,
    validate_spec_document,
)


@pytest.fixture
def validator():
    return PyxbarValidator(DESIGN_SCHEMA)


def test_initialize(validator):
    assert validator.schema == DESIGN_SCHEMA


@pytest.mark.parametrize("value, ok", [(1.0, True), (0, False), (-2.5, False)])
def test_positive(value, ok):
    assert PyxbarValidator({"c0": {"positive": True}}).validate({"c0": value}) is ok


@pytest.mark.parametrize("value", [[1e9, 2e9], (0.5, 0.6)])
def test_is_interval(value):
    v = PyxbarValidator({"band": {"is_interval": True}})
    assert v.validate({"band": value})


@pytest.mark.parametrize("value", [[2e9, 1e9], [0, 1e9], [1e9], [1e9, "2e9"], [True, 2]])
def test_is_interval_error(value):
    v = PyxbarValidator({"band": {"is_interval": True}})
    assert not v.validate({"band": value})


def test_validate(design_document_dict):
    assert validate_design_document(design_document_dict)["name"] == "small"


def test_unknown_key_is_rejected(design_document_dict):
    design_document_dict["resonators"]["A"]["c_0"] = 1e-13
    with pytest.raises(InvalidDesign) as excinfo:
        validate_design_document(design_document_dict)
    assert "resonators" in excinfo.value.errors


def test_future_schema_version(design_document_dict):
    design_document_dict["schema"] = 2
    with pytest.raises(UnsupportedSchemaVersion, match="version 2"):
        validate_design_document(design_document_dict)


def test_not_a_mapping():
    with pytest.raises(InvalidDesign, match="JSON object"):
        validate_design_document([1, 2, 3])


@pytest.mark.parametrize(
    "path, value",
    [
        (("arms",), {"a1": "A", "a2": "A", "b": "B"}),
        (("layout",), {"grounds": "tied"}),
        (("spurs",), {"Z": [{"rm": 1.0, "lm": 1e-9, "cm": 1e-15}]}),
        (("sweep", "f_stop_hz"), 5e9),
        (("topology",), "bridged_tee"),
        (("resonators", "A", "branches"), []),
        (("stopbands_hz",), [[1.2e10, 1.1e10]]),
        (("match",), "best"),
    ],
)
def test_invalid_designs(design_document_dict, path, value):
    document = copy.deepcopy(design_document_dict)
    target = document
    for key in path[:-1]:
        target = target[key]
    target[path[-1]] = value
    with pytest.raises(InvalidDesign):
        validate_design_document(document)


def test_fixed_match_impedances(design_document_dict):
    design_document_dict["match"] = {"z01_re": 30.4, "z01_im": 28.2, "z02_re": 31.1, "z02_im": 8.8}
    assert validate_design_document(design_document_dict)


def test_ladder_may_leave_out_series_arms(design_document_dict):
    design_document_dict.update(topology="ladder", arms={"shunt": ["A"]})
    assert validate_design_document(design_document_dict)


def test_validate_spec(spec_document_dict):
    assert validate_spec_document(spec_document_dict)["fbw_min"] == 0.25


def test_spec_bounds_must_be_ordered(spec_document_dict):
    spec_document_dict["free_parameters"][0].update(lower=1.5, upper=1.2)
    with pytest.raises(InvalidDesign, match="lower >= upper"):
        validate_spec_document(spec_document_dict)


def test_spec_free_parameter_kind(spec_document_dict):
    spec_document_dict["free_parameters"][0]["kind"] = "width"
    with pytest.raises(InvalidDesign):
        validate_spec_document(spec_document_dict)
