import numpy as np
import pytest

from pyxbar.errors import FloatingNode, PyxbarValidationError
from pyxbar.mna import (
    GROUND,
    STIFF_SHORT,
    Branch,
    Netlist,
    capacitor,
    conductance,
    inductor,
    reduce,
    reduce_array,
    resistor,
    stiff_short,
    sweep_reduce,
)
from pyxbar.netcore import FrequencyGrid, Kind, TwoPortMatrix, convert
from pyxbar.topology import lattice_closed_form


def four_arm_lattice(y_a, y_b):
    return Netlist.from_branches(
        [
            Branch("1", "2", conductance(y_a), "A"),
            Branch("1'", "2'", conductance(y_a), "A'"),
            Branch("1", "2'", conductance(y_b), "B"),
            Branch("1'", "2", conductance(y_b), "B'"),
        ],
        ports=[("1", "1'"), ("2", "2'")],
    )


def test_lattice_reduction_matches_closed_form():
    rng = np.random.default_rng(2024)
    worst = 0.0
    for _ in range(1000):
        y_a, y_b = rng.uniform(1e-4, 1.0, 2) + 1j * rng.uniform(-1.0, 1.0, 2)
        f = rng.uniform(1e8, 1e11)
        reduced = reduce(four_arm_lattice(y_a, y_b), f).matrix
        expected = lattice_closed_form(y_a, y_b).entries
        worst = max(worst, np.max(np.abs(reduced - expected)) / np.max(np.abs(expected)))
    assert worst < 1e-9


def test_pi_network():
    pi = Netlist.from_branches(
        [
            Branch("1", GROUND, resistor(1.0)),
            Branch("1", "2", conductance(2.0)),
            Branch("2", GROUND, conductance(3.0)),
        ],
        ports=[("1", GROUND), ("2", GROUND)],
    )
    np.testing.assert_allclose(reduce(pi, 1e9).matrix, [[3, -2], [-2, 5]])


def test_t_network_eliminates_middle_node():
    tee = Netlist.from_branches(
        [
            Branch("1", "m", resistor(10.0)),
            Branch("m", "2", resistor(10.0)),
            Branch("m", GROUND, resistor(20.0)),
        ],
        ports=[("1", GROUND), ("2", GROUND)],
    )
    z = convert(TwoPortMatrix(Kind.Y, reduce(tee, 1e9).matrix), Kind.Z)
    np.testing.assert_allclose(z.entries, [[30, 20], [20, 30]], rtol=1e-12)


def test_internal_node_of_series_lc_is_eliminated():
    inductance, c = 1e-9, 1e-12
    f0 = 1 / (2 * np.pi * np.sqrt(inductance * c))
    netlist = Netlist.from_branches(
        [
            Branch("1", "x", inductor(inductance)),
            Branch("x", "2", capacitor(c)),
            Branch("2", GROUND, resistor(50.0)),
        ],
        ports=[("1", GROUND), ("2", GROUND)],
    )
    f = 1.1 * f0
    w = 2 * np.pi * f
    y_series = 1 / (1j * w * inductance + 1 / (1j * w * c))
    y = reduce(netlist, f).matrix
    np.testing.assert_allclose(y, [[y_series, -y_series], [-y_series, y_series + 0.02]], rtol=1e-12)


def test_floating_island_names_the_node():
    netlist = Netlist.from_branches(
        [
            Branch("1", "2", conductance(1.0)),
            Branch("X", "Y", conductance(1.0)),
        ],
        ports=[("1", GROUND), ("2", GROUND)],
    )
    with pytest.raises(FloatingNode) as excinfo:
        reduce(netlist, 1e9)
    assert excinfo.value.node == "X"
    assert excinfo.value.frequency == pytest.approx(1e9)


def test_stiff_short_couples_ports():
    netlist = Netlist.from_branches(
        [Branch("1", GROUND, conductance(0.02)), Branch("1", "2", stiff_short())],
        ports=[("1", GROUND), ("2", GROUND)],
    )
    y = reduce(netlist, 1e9).matrix
    assert y[0, 1] == -STIFF_SHORT
    assert y[1, 1] == STIFF_SHORT


def test_tie_turns_collapsed_branches_into_annotations():
    netlist = Netlist.from_branches(
        [
            Branch("1", "2", conductance(1.0), "through"),
            Branch("g1", "g2", conductance(1.0), "bridge"),
        ],
        ports=[("1", "g1"), ("2", "g2")],
    )
    tied = netlist.tie("g1", "g2")
    assert [b.label for b in tied.branches] == ["through"]
    assert tied.annotations[0].branch.label == "bridge"
    assert tied.ports == (("1", "g1"), ("2", "g1"))


@pytest.mark.parametrize(
    "branches, ports",
    [
        ([], [("1", GROUND)]),
        ([Branch("1", "1", conductance(1.0))], [("1", GROUND)]),
        ([Branch("1", "2", conductance(1.0))], []),
        ([Branch("1", "2", conductance(1.0))], [("1", "1")]),
        ([Branch("1", "2", conductance(1.0))], [(GROUND, "1")]),
    ],
)
def test_invalid_netlists(branches, ports):
    with pytest.raises(PyxbarValidationError):
        Netlist.from_branches(branches, ports)


def test_sweep_reduce_shapes():
    grid = FrequencyGrid.linear(1e9, 2e9, 5)
    netlist = four_arm_lattice(0.02, 0.01)
    assert reduce_array(netlist, grid.points).shape == (5, 2, 2)
    s = sweep_reduce(netlist, grid, to_s=True)
    assert s.kind is Kind.S
    assert s.ref_impedances == (50 + 0j, 50 + 0j)


def test_sweep_reduce_accepts_array_references():
    grid = FrequencyGrid.linear(1e9, 2e9, 5)
    netlist = four_arm_lattice(0.02, 0.01)
    refs = np.array([50.0, 25.0])
    s = sweep_reduce(netlist, grid, to_s=True, ref_impedances=refs)
    expected = convert(sweep_reduce(netlist, grid), Kind.S, (50.0, 25.0))
    assert s.ref_impedances == (50 + 0j, 25 + 0j)
    np.testing.assert_allclose(s.data, expected.data, atol=1e-14)


def test_sweep_reduce_needs_two_ports():
    netlist = Netlist.from_branches([Branch("1", GROUND, conductance(1.0))], ports=[("1", GROUND)])
    with pytest.raises(PyxbarValidationError):
        sweep_reduce(netlist, FrequencyGrid.linear(1e9, 2e9, 3))
