import numpy as np
import pytest

from pyxbar.errors import (
    ComplexReferenceUnsupported,
    MalformedOptionLine,
    NonMonotoneFrequency,
    PyxbarValidationError,
    UnsupportedParameter,
)
from pyxbar.extraction import MeasuredOnePort
from pyxbar.netcore import FrequencyGrid, Kind, SweepResponse
from pyxbar.touchstone import (
    OptionLine,
    parse_touchstone,
    read_touchstone,
    sidecar_path,
    write_touchstone,
)


@pytest.fixture
def sweep():
    rng = np.random.default_rng(7)
    grid = FrequencyGrid.linear(10e9, 30e9, 51)
    data = rng.uniform(-0.7, 0.7, (51, 2, 2)) + 1j * rng.uniform(-0.7, 0.7, (51, 2, 2))
    return SweepResponse(grid, Kind.S, data, (50, 50), ("measured on wafer 3",))


@pytest.mark.parametrize("fmt", ["RI", "MA", "DB"])
@pytest.mark.parametrize("unit", ["Hz", "MHz", "GHz"])
def test_write_then_read_reproduces_the_sweep(sweep, tmp_path, fmt, unit):
    path = write_touchstone(sweep, tmp_path / "filter.s2p", fmt=fmt, unit=unit)
    back = read_touchstone(path)
    assert back.kind is Kind.S
    assert back.ref_impedances == (50 + 0j, 50 + 0j)
    np.testing.assert_allclose(back.grid.points, sweep.grid.points, rtol=1e-11)
    assert np.max(np.abs(back.data - sweep.data)) < 1e-9
    assert "measured on wafer 3" in back.comments


def test_output_is_byte_stable(sweep, fs_output_dir):
    first = write_touchstone(sweep, "/results/a.s2p").read_bytes()
    second = write_touchstone(sweep, "/results/b.s2p").read_bytes()
    assert first == second
    assert b"# GHz S MA R 50" in first


def test_rejects_malformed_option_line(bad_option_line_file):
    with pytest.raises(MalformedOptionLine, match="XY"):
        read_touchstone(bad_option_line_file)


@pytest.mark.parametrize("line", ["# GHz S RI R", "# GHz S RI R -50", "# GHz S RI R fifty"])
def test_rejects_bad_reference_resistance(line):
    with pytest.raises(MalformedOptionLine):
        OptionLine.parse(line)


def test_rejects_non_monotone_frequencies(non_monotone_file):
    with pytest.raises(NonMonotoneFrequency):
        read_touchstone(non_monotone_file)


@pytest.mark.parametrize("parameter", ["Y", "Z", "H", "G"])
def test_only_s_parameters(parameter):
    text = f"# GHz {parameter} RI R 50\n1 0 0 0 0 0 0 0 0\n2 0 0 0 0 0 0 0 0\n"
    with pytest.raises(UnsupportedParameter):
        parse_touchstone(text, 2)


def test_wrapped_lines_and_lower_case_options(wrapped_file):
    r = read_touchstone(wrapped_file)
    np.testing.assert_allclose(r.grid.points, [1e9, 2e9])
    np.testing.assert_allclose(r.data[0], np.full((2, 2), 0.5), atol=1e-15)
    np.testing.assert_allclose(r.data[1], np.full((2, 2), 0.5j), atol=1e-15)


def test_one_port_becomes_admittance(one_port_file):
    m = read_touchstone(one_port_file)
    assert isinstance(m, MeasuredOnePort)
    np.testing.assert_allclose(m.grid.points, [1e9, 2e9, 3e9])
    np.testing.assert_allclose(m.admittance, [0.02, 0.005, 0.08], rtol=1e-12)


def test_one_port_round_trip(one_port_file, tmp_path):
    m = read_touchstone(one_port_file)
    back = read_touchstone(write_touchstone(m, tmp_path / "r.s1p", fmt="RI"))
    np.testing.assert_allclose(back.admittance, m.admittance, rtol=1e-11)


def test_defaults_and_option_line_text():
    assert OptionLine.parse("#") == OptionLine("GHz", "S", "MA", 50.0)
    options = OptionLine.parse("# khz db s r 75")
    assert (options.unit, options.fmt, options.z0) == ("kHz", "DB", 75.0)
    assert OptionLine.parse(str(options)) == options


def test_single_point_parses_but_is_no_sweep(tmp_path):
    text = "# GHz S RI R 50\n1 0 0 1 0 1 0 0 0\n"
    assert parse_touchstone(text, 2).frequencies.size == 1
    path = tmp_path / "one.s2p"
    path.write_text(text)
    with pytest.raises(PyxbarValidationError):
        read_touchstone(path)


@pytest.mark.parametrize(
    "text",
    [
        "# GHz S RI R 50\n",
        "# GHz S RI R 50\n1 0 0 1 0 1 0\n",
        "[Version] 2.0\n# GHz S RI R 50\n1 0 0 1 0 1 0 0 0\n",
        "# GHz S RI R 50\n1 0 0 1 zero 1 0 0 0\n",
    ],
)
def test_malformed_data(text):
    with pytest.raises(PyxbarValidationError):
        parse_touchstone(text, 2)


def test_file_suffix_decides_port_count(sweep, tmp_path):
    with pytest.raises(PyxbarValidationError):
        write_touchstone(sweep, tmp_path / "filter.s1p")
    with pytest.raises(PyxbarValidationError):
        write_touchstone(sweep, tmp_path / "filter.csv")


def test_complex_references_need_a_sidecar(sweep, tmp_path):
    refs = (30.4 + 28.2j, 31.1 + 8.8j)
    matched = SweepResponse(sweep.grid, Kind.S, sweep.data, refs)
    path = tmp_path / "matched.s2p"
    with pytest.raises(ComplexReferenceUnsupported):
        write_touchstone(matched, path)

    write_touchstone(matched, path, sidecar=True)
    assert sidecar_path(path).exists()
    back = read_touchstone(path)
    assert back.ref_impedances == refs
    assert np.max(np.abs(back.data - matched.data)) < 1e-9

    write_touchstone(sweep, path)
    assert not sidecar_path(path).exists()
    assert read_touchstone(path).ref_impedances == (50 + 0j, 50 + 0j)


def test_unknown_format(sweep, tmp_path):
    with pytest.raises(PyxbarValidationError):
        write_touchstone(sweep, tmp_path / "x.s2p", fmt="XY")
