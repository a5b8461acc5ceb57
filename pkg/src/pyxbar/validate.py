"""
Provides validation of design and target-spec files by checking against a schema.

Unknown keys are rejected everywhere, so a misspelt element name fails loudly
instead of silently falling back to a default.
"""

from cerberus import Validator

from .errors import InvalidDesign, UnsupportedSchemaVersion

SCHEMA_VERSION = 1
"""int : The design/spec file format version this release reads and writes."""


class PyxbarValidator(Validator):
    """
    Validator with the custom rules used by the pyxbar file schemas.

    See Also
    --------
    * https://docs.python-cerberus.org/customize.html#class-based-custom-validators
    """

    def _validate_positive(self, positive, field, value):
        """Test that a number is strictly positive.

        The rule's arguments are validated against this schema:
        {'type': 'boolean'}
        """
        if positive and isinstance(value, (int, float)) and not value > 0:
            self._error(field, "Must be > 0")

    def _validate_is_interval(self, is_interval, field, value):
        """Test that a value is a ``[lo, hi]`` pair with ``0 < lo < hi``.

        The rule's arguments are validated against this schema:
        {'type': 'boolean'}
        """
        if not is_interval:
            return
        if not isinstance(value, (list, tuple)) or len(value) != 2:
            self._error(field, "Must be a [lo, hi] pair")
            return
        lo, hi = value
        if not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in value):
            self._error(field, "Interval bounds must be numbers")
        elif not 0 < lo < hi:
            self._error(field, "Interval must satisfy 0 < lo < hi")

    def _validate_schema_version(self, schema_version, field, value):
        """Test that the file format version is one this release can read.

        The rule's arguments are validated against this schema:
        {'type': 'integer'}
        """
        if isinstance(value, int) and value != schema_version:
            self._error(field, f"Unsupported schema version {value}; this release reads version {schema_version}")


_POSITIVE = {"type": "number", "positive": True}
_NON_NEGATIVE = {"type": "number", "min": 0}

BRANCH_SCHEMA = {
    "rm": {**_NON_NEGATIVE, "required": True},
    "lm": {**_POSITIVE, "required": True},
    "cm": {**_POSITIVE, "required": True},
    "mode": {"type": "string", "regex": r"^[SAsa]\d+$"},
}

GEOMETRY_SCHEMA = {
    "n_e": {"type": "integer", "min": 1, "required": True},
    "l_e": {**_POSITIVE, "required": True},
    "w_e": {**_POSITIVE, "required": True},
    "w_g": {**_POSITIVE, "required": True},
    "t1": _POSITIVE,
    "t2": _POSITIVE,
    "pitch": _POSITIVE,
}

RESONATOR_SCHEMA = {
    "c0": {**_POSITIVE, "required": True},
    "r0": _NON_NEGATIVE,
    "rs": _NON_NEGATIVE,
    "ls": _NON_NEGATIVE,
    "branches": {
        "type": "list",
        "minlength": 1,
        "required": True,
        "schema": {"type": "dict", "schema": BRANCH_SCHEMA},
    },
    "geometry": {"type": "dict", "schema": GEOMETRY_SCHEMA},
}
"""dict : Schema for one mBVD resonator (SI units: F, H, ohm)."""

_MATCH = {
    "oneof": [
        {"type": "string", "allowed": ["auto", "none"]},
        {
            "type": "dict",
            "schema": {
                "z01_re": {**_POSITIVE, "required": True},
                "z01_im": {"type": "number", "required": True},
                "z02_re": {**_POSITIVE, "required": True},
                "z02_im": {"type": "number", "required": True},
            },
        },
    ],
}

_STOPBANDS = {"type": "list", "schema": {"is_interval": True}}

DESIGN_SCHEMA = {
    "schema": {"type": "integer", "required": True, "schema_version": SCHEMA_VERSION},
    "name": {"type": "string"},
    "topology": {
        "type": "string",
        "required": True,
        "allowed": ["ladder", "canonical_lattice", "direct_lattice", "layout_balanced"],
    },
    "resonators": {
        "type": "dict",
        "required": True,
        "minlength": 1,
        "keysrules": {"type": "string"},
        "valuesrules": {"type": "dict", "schema": RESONATOR_SCHEMA},
    },
    "arms": {
        "type": "dict",
        "required": True,
        "schema": {
            "a": {"type": "string"},
            "b": {"type": "string"},
            "a1": {"type": "string"},
            "a2": {"type": "string"},
            "series": {"type": "list", "schema": {"type": "string"}},
            "shunt": {"type": "list", "schema": {"type": "string"}},
        },
    },
    "layout": {
        "type": "dict",
        "schema": {
            "grounds": {"type": "string", "allowed": ["separate", "tied"]},
            "fourth_arm": {"type": "string", "allowed": ["present", "dangling"]},
            "return_path": {
                "type": "dict",
                "schema": {"rs": _NON_NEGATIVE, "ls": _NON_NEGATIVE},
            },
        },
    },
    "geometry": {
        "type": "dict",
        "keysrules": {"type": "string"},
        "valuesrules": {"type": "dict", "schema": GEOMETRY_SCHEMA},
    },
    "sweep": {
        "type": "dict",
        "required": True,
        "schema": {
            "f_start_hz": {**_POSITIVE, "required": True},
            "f_stop_hz": {**_POSITIVE, "required": True},
            "n_points": {"type": "integer", "min": 2, "required": True},
            "spacing": {"type": "string", "allowed": ["linear", "logarithmic"]},
        },
    },
    "match": _MATCH,
    "stopbands_hz": _STOPBANDS,
    "spurs": {
        "type": "dict",
        "keysrules": {"type": "string"},
        "valuesrules": {"type": "list", "schema": {"type": "dict", "schema": BRANCH_SCHEMA}},
    },
    "ref_impedances_ohm": {
        "type": "list",
        "minlength": 2,
        "maxlength": 2,
        "schema": {"type": "list", "minlength": 2, "maxlength": 2, "schema": {"type": "number"}},
    },
}
"""dict : Schema for validating design files."""

SPEC_SCHEMA = {
    "schema": {"type": "integer", "required": True, "schema_version": SCHEMA_VERSION},
    "name": {"type": "string"},
    "f_c_target_hz": {**_POSITIVE, "required": True},
    "f_c_tolerance": _NON_NEGATIVE,
    "fbw_min": {"type": "number", "min": 0, "max": 1, "required": True},
    "il_max_db": {**_POSITIVE, "required": True},
    "oob_min_db": _NON_NEGATIVE,
    "stopbands_hz": _STOPBANDS,
    "weights": {
        "type": "dict",
        "schema": {k: _NON_NEGATIVE for k in ("il", "fbw", "oob", "f_c")},
    },
    "free_parameters": {
        "type": "list",
        "schema": {
            "type": "dict",
            "schema": {
                "resonator": {"type": "string", "required": True},
                "kind": {
                    "type": "string",
                    "required": True,
                    "allowed": ["scale", "f_shift", "c0", "r0", "rs", "ls", "cm", "lm", "rm"],
                },
                "lower": {**_POSITIVE, "required": True},
                "upper": {**_POSITIVE, "required": True},
            },
        },
    },
    "match": _MATCH,
}
"""dict : Schema for validating target-spec files."""

DESIGN_VALIDATOR = PyxbarValidator(DESIGN_SCHEMA)
SPEC_VALIDATOR = PyxbarValidator(SPEC_SCHEMA)
RESONATOR_VALIDATOR = PyxbarValidator(RESONATOR_SCHEMA)

_ARMS_BY_TOPOLOGY = {
    "canonical_lattice": {"a", "b"},
    "direct_lattice": {"a", "b"},
    "layout_balanced": {"a1", "a2", "b"},
    "ladder": {"series", "shunt"},
}


def require_mapping(document, what):
    if not isinstance(document, dict):
        raise InvalidDesign(f"{what} must be a JSON object, got {type(document).__name__}")


def _raise_for(errors, what, document):
    version = document.get("schema")
    if isinstance(version, int) and not isinstance(version, bool) and version != SCHEMA_VERSION:
        raise UnsupportedSchemaVersion(f"{what}: {errors['schema'][0]}", errors)
    raise InvalidDesign(f"{what} is not valid: {errors}", errors)


def _cross_check(document):
    errors = {}
    topology = document["topology"]
    arms = set(document["arms"])
    expected = _ARMS_BY_TOPOLOGY[topology]
    if arms != expected and not (topology == "ladder" and arms and arms <= expected):
        errors["arms"] = [f"{topology} needs arms {sorted(expected)}, got {sorted(arms)}"]
    if "layout" in document and topology != "direct_lattice":
        errors["layout"] = ["layout options only apply to direct_lattice designs"]
    names = set(document["resonators"])
    for key in ("spurs", "geometry"):
        unknown = set(document.get(key, {})) - names
        if unknown:
            errors[key] = [f"unknown resonators {sorted(unknown)}"]
    sweep = document["sweep"]
    if not sweep["f_start_hz"] < sweep["f_stop_hz"]:
        errors["sweep"] = ["f_start_hz must be below f_stop_hz"]
    return errors


def validate_design_document(document, what="design"):
    """Validate a parsed design file, raising :class:`InvalidDesign` on failure"""
    require_mapping(document, what)
    validator = DESIGN_VALIDATOR
    if not validator.validate(document):
        _raise_for(validator.errors, what, document)
    errors = _cross_check(document)
    if errors:
        raise InvalidDesign(f"{what} is not valid: {errors}", errors)
    return validator.document


def validate_spec_document(document, what="spec"):
    """Validate a parsed target-spec file, raising :class:`InvalidDesign` on failure"""
    require_mapping(document, what)
    validator = SPEC_VALIDATOR
    if not validator.validate(document):
        _raise_for(validator.errors, what, document)
    for i, fp in enumerate(document.get("free_parameters", [])):
        if not fp["lower"] < fp["upper"]:
            raise InvalidDesign(
                f"{what}: free parameter {i} has lower >= upper", {"free_parameters": [i]}
            )
    return validator.document
