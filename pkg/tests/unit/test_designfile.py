import json

import pytest

from pyxbar.designfile import (
    DesignDocument,
    SpecDocument,
    dump_design,
    dump_resonator,
    dump_spec,
    load_design,
    load_resonator,
    load_spec,
)
from pyxbar.errors import InvalidDesign
from pyxbar.topology import DirectLatticeArms, Topology


def test_bundled_direct_lattice(direct_lattice_doc):
    doc = direct_lattice_doc
    assert doc.design.topology is Topology.DIRECT_LATTICE
    assert isinstance(doc.design.arms, DirectLatticeArms)
    assert doc.design.arms.return_path is not None
    assert doc.match == "auto"
    assert doc.stopbands == ((1.05e10, 1.15e10), (2.7e10, 2.9e10))
    assert len(doc.grid) == 1601


def test_bundled_ladder_is_unmatched(ladder_doc):
    assert ladder_doc.match == "none"
    assert ladder_doc.design.resonator_count == 3


@pytest.mark.parametrize(
    "design_file", ["direct_lattice_file", "layout_balanced_file", "ladder_file"], indirect=True
)
def test_design_round_trip(design_file, tmp_path):
    doc = load_design(design_file)
    again = load_design(dump_design(doc, tmp_path / "design.json"))
    assert again.design == doc.design
    assert again.grid.to_dict() == doc.grid.to_dict()
    assert again.match == doc.match
    assert again.stopbands == doc.stopbands


def test_fixed_match_survives_a_round_trip(design_document_dict):
    design_document_dict["match"] = {"z01_re": 30.4, "z01_im": 28.2, "z02_re": 31.1, "z02_im": 8.8}
    doc = DesignDocument.from_dict(design_document_dict)
    assert doc.match == (30.4 + 28.2j, 31.1 + 8.8j)
    assert DesignDocument.from_dict(doc.to_dict()).match == doc.match


def test_geometry_is_attached_to_its_resonator(design_document_dict):
    design_document_dict["geometry"] = {"A": {"n_e": 10, "l_e": 4e-5, "w_e": 1e-6, "w_g": 2e-6}}
    doc = DesignDocument.from_dict(design_document_dict)
    assert doc.design.resonators["A"].geometry.n_e == 10
    assert doc.design.resonators["B"].geometry is None


def test_with_design_keeps_the_sweep(direct_lattice_doc, canonical_lattice):
    doc = direct_lattice_doc.with_design(canonical_lattice)
    assert doc.design is canonical_lattice
    assert doc.grid is direct_lattice_doc.grid


def test_bundled_compare_spec(compare_spec_doc):
    assert compare_spec_doc.spec.fbw_min == 0.45
    assert compare_spec_doc.match == "none"
    assert [fp.label for fp in compare_spec_doc.free] == ["A.scale", "B.scale"]
    assert compare_spec_doc.spec.weights["oob"] == 0.0


def test_spec_round_trip(spec_document_dict, tmp_path):
    doc = SpecDocument.from_dict(spec_document_dict)
    assert doc.match is None
    again = load_spec(dump_spec(doc, tmp_path / "spec.json"))
    assert again == doc


def test_resonator_round_trip(three_mode_file, tmp_path):
    p = load_resonator(three_mode_file)
    assert p.n_branches == 3
    assert load_resonator(dump_resonator(p, tmp_path / "r.json")) == p


def test_invalid_resonator_file(tmp_path):
    path = tmp_path / "r.json"
    path.write_text(json.dumps({"c0": -1.0, "branches": []}))
    with pytest.raises(InvalidDesign) as excinfo:
        load_resonator(path)
    assert set(excinfo.value.errors) == {"c0", "branches"}


def test_broken_json(tmp_path):
    path = tmp_path / "design.json"
    path.write_text('{"schema": 1, ')
    with pytest.raises(InvalidDesign, match="not valid JSON"):
        load_design(path)


def test_written_files_are_plain_json(direct_lattice_doc, fs_output_dir):
    path = dump_design(direct_lattice_doc, "/results/d.json")
    with open(path) as f:
        document = json.load(f)
    assert document["schema"] == 1
    assert document["topology"] == "direct_lattice"
