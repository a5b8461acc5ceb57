import numpy as np
import pytest

from pyxbar.errors import (
    DegenerateDenominator,
    InfeasibleMatch,
    KindMismatch,
    NonPositiveMatchResistance,
    PyxbarValidationError,
    UnilateralNetwork,
)
from pyxbar.matching import (
    apply_match,
    conjugate_match,
    input_reflection,
    match_frequency,
    match_sweep,
    max_available_gain,
    output_reflection,
    rollett_k,
    synthesize_l_section,
    transducer_gain,
)
from pyxbar.netcore import FrequencyGrid, Kind, SweepResponse, TwoPortMatrix, convert


def random_lossy_pi(rng):
    g = rng.uniform(0.005, 0.05, 3)
    b = rng.uniform(-0.05, 0.05, 3)
    y1, y2, y3 = g + 1j * b
    return convert(TwoPortMatrix(Kind.Y, [[y1 + y3, -y3], [-y3, y2 + y3]]), Kind.S)


def two_point_sweep(s):
    grid = FrequencyGrid([1e9, 2e9])
    return SweepResponse(grid, Kind.S, np.stack([s.entries, s.entries]), s.ref_impedances)


def test_match_is_a_fixed_point_of_renormalization():
    rng = np.random.default_rng(11)
    for _ in range(100):
        s = random_lossy_pi(rng)
        assert rollett_k(s) > 1
        solution = conjugate_match(s)
        matched = apply_match(two_point_sweep(s), solution)
        assert abs(matched.data[0, 0, 0]) < 1e-8
        assert abs(matched.data[0, 1, 1]) < 1e-8
        assert abs(matched.data[0, 1, 0]) ** 2 == pytest.approx(max_available_gain(s), abs=1e-8)


def test_source_and_load_reflections_give_the_maximum_gain():
    s = random_lossy_pi(np.random.default_rng(3))
    gamma_s, gamma_l = conjugate_match(s).gamma_m
    assert transducer_gain(s, gamma_s, gamma_l) == pytest.approx(max_available_gain(s), rel=1e-10)
    assert input_reflection(s, gamma_l) == pytest.approx(np.conj(gamma_s), abs=1e-10)
    assert output_reflection(s, gamma_s) == pytest.approx(np.conj(gamma_l), abs=1e-10)


def test_series_hundred_ohms_sits_on_the_boundary():
    s = TwoPortMatrix(Kind.S, [[0.5, 0.5], [0.5, 0.5]], (50, 50))
    assert rollett_k(s) == 1.0
    with pytest.raises(DegenerateDenominator) as excinfo:
        conjugate_match(s)
    solution = excinfo.value.solution
    assert solution.boundary
    assert solution.feasible
    assert solution.z0_match is None
    assert solution.gamma_m == (1 + 0j, 1 + 0j)


def test_active_two_port_has_no_match():
    s = TwoPortMatrix(Kind.S, [[0.5, 0.1], [3.0, 0.5]], (50, 50))
    with pytest.raises(InfeasibleMatch) as excinfo:
        conjugate_match(s)
    assert excinfo.value.rollett_k < 1
    with pytest.raises(InfeasibleMatch):
        max_available_gain(s)


def test_matched_two_port_keeps_its_references():
    s = TwoPortMatrix(Kind.S, [[0.0, 0.5], [0.5, 0.0]], (50, 50))
    solution = conjugate_match(s)
    assert solution.gamma_m == (0j, 0j)
    assert solution.z0_match == (50 + 0j, 50 + 0j)
    r = two_point_sweep(s)
    assert apply_match(r, solution) is r


def test_matching_needs_one_real_reference():
    s = TwoPortMatrix(Kind.S, [[0.1, 0.5], [0.5, 0.1]], (50, 60))
    with pytest.raises(PyxbarValidationError):
        conjugate_match(s)
    with pytest.raises(PyxbarValidationError):
        conjugate_match(TwoPortMatrix(Kind.S, [[0.1, 0.5], [0.5, 0.1]], (50, 50)), z0=75.0)


def test_matching_needs_s():
    with pytest.raises(KindMismatch):
        conjugate_match(TwoPortMatrix(Kind.Y, np.eye(2)))


def test_unilateral_network():
    with pytest.raises(UnilateralNetwork):
        rollett_k(TwoPortMatrix(Kind.S, [[0.1, 0.0], [0.5, 0.1]], (50, 50)))


def test_match_frequency_is_peak_transmission():
    grid = FrequencyGrid([1e9, 2e9, 3e9])
    data = np.stack([[[0.5, 0.1], [0.1, 0.5]], [[0.2, 0.7], [0.7, 0.2]], [[0.5, 0.2], [0.2, 0.5]]])
    r = SweepResponse(grid, Kind.S, data, (50, 50))
    assert match_frequency(r) == 2e9
    solution = match_sweep(r)
    assert solution.f_design == 2e9
    assert match_sweep(r, 2.9e9).f_design == 3e9


def test_solution_to_dict():
    solution = conjugate_match(random_lossy_pi(np.random.default_rng(5)), f_design=1e9)
    d = solution.to_dict()
    assert d["f_design_hz"] == 1e9
    assert d["feasible"] is True
    assert len(d["z0_match_ohm"]) == 2
    assert d["rollett_k"] > 1


@pytest.mark.parametrize("z_load", [100 - 40j, 20 + 30j, 10 - 5j, 150 + 80j])
def test_l_sections_match_to_z0(z_load):
    sections = synthesize_l_section(z_load, 50.0, 1e9)
    assert len(sections) == 2
    for section in sections:
        assert section.input_impedance(z_load) == pytest.approx(50.0, abs=1e-9)
        assert len(section.elements) == 2


def test_l_section_needs_resistive_load():
    with pytest.raises(NonPositiveMatchResistance):
        synthesize_l_section(-5 + 10j, 50.0, 1e9)
