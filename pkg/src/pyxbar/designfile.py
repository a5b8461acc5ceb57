"""
Design and target-spec files.

A design file is JSON, versioned by a top-level ``"schema": 1``::

    {
      "schema": 1,
      "name": "demo",
      "topology": "direct_lattice",
      "resonators": {"A": {"c0": 1.46e-13, "branches": [{"rm": 0.46, "lm": 1.4e-9, "cm": 7.3e-14, "mode": "S2"}]}},
      "arms": {"a": "A", "b": "B"},
      "layout": {"grounds": "separate", "fourth_arm": "present"},
      "sweep": {"f_start_hz": 1e10, "f_stop_hz": 3e10, "n_points": 1601},
      "match": "auto",
      "stopbands_hz": [[1.05e10, 1.15e10]]
    }

A target-spec file carries the optimization goal and the free parameters::

    {
      "schema": 1,
      "f_c_target_hz": 1.97e10,
      "fbw_min": 0.25,
      "il_max_db": 1.0,
      "free_parameters": [{"resonator": "B", "kind": "c0", "lower": 0.8, "upper": 1.2}]
    }
"""

import dataclasses
import json
import pathlib
from dataclasses import dataclass, field
from typing import Optional, Tuple

from .design import FreeParameter, MatchMode, TargetSpec
from .errors import InvalidDesign
from .files import write_json
from .logging import logger
from .netcore import FrequencyGrid
from .resonator import MbvdParams
from .topology import FilterDesign
from .validate import (
    RESONATOR_VALIDATOR,
    SCHEMA_VERSION,
    require_mapping,
    validate_design_document,
    validate_spec_document,
)


def _load_json(path):
    path = pathlib.Path(path)
    try:
        with open(path, "r", encoding="utf-8") as f:
            return json.load(f)
    except json.JSONDecodeError as e:
        raise InvalidDesign(f"{path} is not valid JSON: {e}")


def _match_from_document(value) -> MatchMode:
    if value is None or isinstance(value, str):
        return value or "auto"
    return (
        complex(value["z01_re"], value["z01_im"]),
        complex(value["z02_re"], value["z02_im"]),
    )


def _match_to_document(match: MatchMode):
    if match is None or isinstance(match, str):
        return match or "auto"
    z1, z2 = (complex(z) for z in match)
    return {"z01_re": z1.real, "z01_im": z1.imag, "z02_re": z2.real, "z02_im": z2.imag}


@dataclass(frozen=True)
class DesignDocument:
    """A design together with the sweep, match mode and stopbands it is evaluated with"""

    design: FilterDesign
    grid: FrequencyGrid
    match: MatchMode = "auto"
    stopbands: Tuple[Tuple[float, float], ...] = field(default_factory=tuple)

    @classmethod
    def from_dict(cls, document, what="design") -> "DesignDocument":
        document = validate_design_document(document, what)
        geometry = document.get("geometry", {})
        resonators = {}
        for name, d in document["resonators"].items():
            d = dict(d)
            if name in geometry:
                d["geometry"] = geometry[name]
            resonators[name] = d
        design = FilterDesign.from_dict({**document, "resonators": resonators})
        return cls(
            design=design,
            grid=FrequencyGrid.from_dict(document["sweep"]),
            match=_match_from_document(document.get("match")),
            stopbands=tuple((float(lo), float(hi)) for lo, hi in document.get("stopbands_hz", [])),
        )

    def to_dict(self):
        d = {"schema": SCHEMA_VERSION}
        d.update(self.design.to_dict())
        d["sweep"] = self.grid.to_dict()
        d["match"] = _match_to_document(self.match)
        if self.stopbands:
            d["stopbands_hz"] = [list(b) for b in self.stopbands]
        return d

    def with_design(self, design: FilterDesign) -> "DesignDocument":
        return dataclasses.replace(self, design=design)


@dataclass(frozen=True)
class SpecDocument:
    spec: TargetSpec
    free: Tuple[FreeParameter, ...] = field(default_factory=tuple)
    match: Optional[MatchMode] = None

    @classmethod
    def from_dict(cls, document, what="spec") -> "SpecDocument":
        document = validate_spec_document(document, what)
        spec = TargetSpec(
            f_c_target=float(document["f_c_target_hz"]),
            fbw_min=float(document["fbw_min"]),
            il_max_db=float(document["il_max_db"]),
            oob_min_db=float(document.get("oob_min_db", 0.0)),
            stopbands=tuple(tuple(b) for b in document.get("stopbands_hz", [])),
            weights=document.get("weights", {}),
            f_c_tolerance=float(document.get("f_c_tolerance", 0.0)),
        )
        free = tuple(FreeParameter(**fp) for fp in document.get("free_parameters", []))
        match = _match_from_document(document["match"]) if "match" in document else None
        return cls(spec, free, match)

    def to_dict(self):
        s = self.spec
        d = {
            "schema": SCHEMA_VERSION,
            "f_c_target_hz": s.f_c_target,
            "f_c_tolerance": s.f_c_tolerance,
            "fbw_min": s.fbw_min,
            "il_max_db": s.il_max_db,
            "oob_min_db": s.oob_min_db,
            "stopbands_hz": [list(b) for b in s.stopbands],
            "weights": dict(s.weights),
            "free_parameters": [fp.to_dict() for fp in self.free],
        }
        if self.match is not None:
            d["match"] = _match_to_document(self.match)
        return d


def load_design(path) -> DesignDocument:
    """Read and validate a design file"""
    doc = DesignDocument.from_dict(_load_json(path), what=str(path))
    logger.info(f"Loaded {doc.design.topology.value} design from {path}")
    return doc


def dump_design(doc: DesignDocument, path) -> pathlib.Path:
    return write_json(path, doc.to_dict())


def load_spec(path) -> SpecDocument:
    """Read and validate a target-spec file"""
    return SpecDocument.from_dict(_load_json(path), what=str(path))


def dump_spec(doc: SpecDocument, path) -> pathlib.Path:
    return write_json(path, doc.to_dict())


def load_resonator(path) -> MbvdParams:
    """Read a single resonator (the ``resonators`` entry format) from JSON"""
    document = _load_json(path)
    require_mapping(document, str(path))
    if not RESONATOR_VALIDATOR.validate(document):
        errors = RESONATOR_VALIDATOR.errors
        raise InvalidDesign(f"{path} is not a valid resonator: {errors}", errors)
    return MbvdParams.from_dict(document)


def dump_resonator(p: MbvdParams, path) -> pathlib.Path:
    return write_json(path, p.to_dict())
