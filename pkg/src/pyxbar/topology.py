"""
Topology
========
Builders that turn resonator models into filter netlists.

Four realizations are available:

``canonical_lattice``
    The four-arm bridge: ``A`` arms 1-2 and 1'-2', ``B`` arms 1-2' and 1'-2,
    ports (1, 1') and (2, 2'). This is the reference every other lattice is
    checked against; its port admittance matrix is::

        y11 = y22 = (yA + yB) / 2
        y12 = y21 = (yB - yA) / 2

``direct_lattice``
    Single-ended layout with one ground pad per port (``G1``, ``G2``). The
    second ``A`` resonator sits between the two ground pads and can either be
    connected (``fourth_arm="present"``) or hang from ``G1`` with its far
    terminal open (``"dangling"``), in which case it is kept as an annotation
    only. With ``grounds="tied"`` both pads merge with the global ground and an
    arm between them is shorted. An optional series ``return_path`` (Rs, Ls)
    between the port-1 ground pad and the lattice node models the ground
    return of this asymmetric layout.

``layout_balanced``
    ``A1`` between the signal pads, cross arms ``B`` to the opposite ground
    pads, and the ground-to-ground arm split into two ``A2`` sections: one
    between each pair of facing ground pads of the ground-signal-ground
    probes. The probes tie the two ground pads of each port, so the sections
    end up in parallel and the total ground-to-ground admittance is
    ``2 * Y_A2``, which equals ``Y_A1`` under an ideal half split
    (``A2 = scale(A1, 0.5)``). :func:`ground_pair_admittance` returns the
    per-pad-pair value ``Y_A2``, i.e. ``Y_A1 / 2`` for the ideal split.

``ladder``
    Alternating series/shunt chain. It starts with a shunt element when there
    are more shunt than series resonators, otherwise with a series element.
"""

import dataclasses
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Mapping, Optional, Tuple

import numpy as np

from .errors import EmptyDesign, PyxbarValidationError
from .logging import logger
from .mna import GROUND, Annotation, Branch, Netlist, series_rl, stiff_short
from .netcore import FrequencyGrid, Kind, SweepResponse, TwoPortMatrix, as_ref_impedances
from .resonator import MbvdParams, MotionalBranch, add_spur, admittance, admittance_evaluator


class Topology(str, Enum):
    LADDER = "ladder"
    CANONICAL_LATTICE = "canonical_lattice"
    DIRECT_LATTICE = "direct_lattice"
    LAYOUT_BALANCED = "layout_balanced"


# -----------------------------------------------------------------------------
# Closed form and builders
# -----------------------------------------------------------------------------


def lattice_closed_form(y_a, y_b) -> TwoPortMatrix:
    """Admittance matrix of the symmetric lattice with arm admittances ``y_a``, ``y_b``"""
    y11 = (y_a + y_b) / 2
    y21 = (y_b - y_a) / 2
    return TwoPortMatrix(Kind.Y, [[y11, y21], [y21, y11]])


def build_canonical_lattice(a: MbvdParams, b: MbvdParams) -> Netlist:
    ya, yb = admittance_evaluator(a), admittance_evaluator(b)
    return Netlist.from_branches(
        [
            Branch("1", "2", ya, "A"),
            Branch("1'", "2'", ya, "A'"),
            Branch("1", "2'", yb, "B"),
            Branch("1'", "2", yb, "B'"),
        ],
        ports=[("1", "1'"), ("2", "2'")],
    )


@dataclass(frozen=True)
class ReturnPath:
    rs: float = 0.0
    ls: float = 0.0

    def __post_init__(self):
        if self.rs < 0 or self.ls < 0 or (self.rs == 0 and self.ls == 0):
            raise PyxbarValidationError(
                f"A return path needs rs >= 0, ls >= 0 and not both zero (got {self.rs}, {self.ls})"
            )


def build_direct_lattice(
    a: MbvdParams,
    b: MbvdParams,
    grounds: str = "separate",
    fourth_arm: str = "present",
    return_path: Optional[ReturnPath] = None,
) -> Netlist:
    if grounds not in ("separate", "tied"):
        raise PyxbarValidationError(f"grounds must be 'separate' or 'tied', got {grounds!r}")
    if fourth_arm not in ("present", "dangling"):
        raise PyxbarValidationError(
            f"fourth_arm must be 'present' or 'dangling', got {fourth_arm!r}"
        )
    ya, yb = admittance_evaluator(a), admittance_evaluator(b)
    branches = [
        Branch("P1", "P2", ya, "A"),
        Branch("P1", "G2", yb, "B"),
        Branch("G1", "P2", yb, "B'"),
    ]
    annotations = []
    fourth = Branch("G1", "G2", ya, "A'")
    if fourth_arm == "present":
        branches.append(fourth)
    else:
        annotations.append(Annotation(dataclasses.replace(fourth, node_b="D"), "dangling"))
    pad1 = "G1"
    if return_path is not None:
        pad1 = "G1pad"
        branches.append(Branch(pad1, "G1", series_rl(return_path.rs, return_path.ls), "return"))
    netlist = Netlist.from_branches(
        branches, ports=[("P1", pad1), ("P2", "G2")], annotations=annotations
    )
    if grounds == "tied":
        netlist = netlist.tie(GROUND, pad1, "grounds tied").tie(GROUND, "G2", "grounds tied")
    return netlist


def build_layout_balanced(a1: MbvdParams, a2: MbvdParams, b: MbvdParams) -> Netlist:
    ya1, ya2, yb = (admittance_evaluator(p) for p in (a1, a2, b))
    netlist = Netlist.from_branches(
        [
            Branch("P1", "P2", ya1, "A1"),
            Branch("P1", "G2a", yb, "B"),
            Branch("G1a", "P2", yb, "B'"),
            Branch("G1a", "G2a", ya2, "A2"),
            Branch("G1b", "G2b", ya2, "A2'"),
        ],
        ports=[("P1", "G1a"), ("P2", "G2a")],
    )
    # ground-signal-ground probes short the two ground pads of each port
    return netlist.tie("G1a", "G1b", "probe").tie("G2a", "G2b", "probe")


def ground_pair_admittance(a2: MbvdParams, f):
    """Admittance between one pair of facing ground pads (``Y_A2``)"""
    return admittance(a2, f)


def _ladder_order(series, shunt):
    series, shunt = list(series), list(shunt)
    if not series and not shunt:
        raise EmptyDesign("A ladder needs at least one resonator")
    if abs(len(series) - len(shunt)) > 1:
        raise PyxbarValidationError(
            f"Cannot alternate {len(series)} series and {len(shunt)} shunt resonators"
        )
    first, second = ("shunt", "series") if len(shunt) > len(series) else ("series", "shunt")
    pools = {"series": series, "shunt": shunt}
    order = []
    for i in range(len(series) + len(shunt)):
        role = first if i % 2 == 0 else second
        order.append((role, pools[role].pop(0)))
    return order


def build_ladder(series, shunt) -> Netlist:
    """
    Alternating series/shunt ladder between port 1 (left) and port 2 (right).

    Raises
    ------
    EmptyDesign
        If both lists are empty.
    """
    order = _ladder_order(series, shunt)
    branches = []
    k = 0
    for i, (role, p) in enumerate(order):
        y = admittance_evaluator(p)
        if role == "series":
            branches.append(Branch(f"N{k}", f"N{k + 1}", y, f"series{i}"))
            k += 1
        else:
            branches.append(Branch(f"N{k}", GROUND, y, f"shunt{i}"))
    if k == 0:
        # shunt-only network: both ports sit on the same node
        branches.append(Branch("N0", "N1", stiff_short(), "through"))
        k = 1
    return Netlist.from_branches(branches, ports=[("N0", GROUND), (f"N{k}", GROUND)])


def ladder_cascade(series, shunt, grid: FrequencyGrid) -> SweepResponse:
    """ABCD chain of the same ladder as :func:`build_ladder` (cascade oracle)"""
    order = _ladder_order(series, shunt)
    n = len(grid)
    total = np.broadcast_to(np.eye(2, dtype=complex), (n, 2, 2)).copy()
    for role, p in order:
        y = admittance(p, grid.points)
        stage = np.broadcast_to(np.eye(2, dtype=complex), (n, 2, 2)).copy()
        if role == "series":
            stage[:, 0, 1] = 1.0 / y
        else:
            stage[:, 1, 0] = y
        total = total @ stage
    return SweepResponse(grid, Kind.ABCD, total)


# -----------------------------------------------------------------------------
# Designs
# -----------------------------------------------------------------------------


@dataclass(frozen=True)
class LatticeArms:
    a: str
    b: str


@dataclass(frozen=True)
class DirectLatticeArms(LatticeArms):
    grounds: str = "separate"
    fourth_arm: str = "present"
    return_path: Optional[ReturnPath] = None


@dataclass(frozen=True)
class BalancedArms:
    a1: str
    a2: str
    b: str


@dataclass(frozen=True)
class LadderArms:
    series: Tuple[str, ...]
    shunt: Tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "series", tuple(self.series))
        object.__setattr__(self, "shunt", tuple(self.shunt))


_VARIANTS = {
    Topology.CANONICAL_LATTICE: LatticeArms,
    Topology.DIRECT_LATTICE: DirectLatticeArms,
    Topology.LAYOUT_BALANCED: BalancedArms,
    Topology.LADDER: LadderArms,
}


@dataclass(frozen=True)
class FilterDesign:
    """
    A filter: topology variant, named resonators, optional spurious branches
    per resonator and the port reference impedances.

    Spurs are stored separately from the resonators they belong to and are
    injected when the netlist is built, so a spur-free twin of a design is one
    :meth:`without_spurs` call away.
    """

    topology: Topology
    arms: object
    resonators: Mapping[str, MbvdParams]
    spurs: Mapping[str, Tuple[MotionalBranch, ...]] = field(default_factory=dict)
    ref_impedances: Tuple[complex, complex] = (50.0 + 0j, 50.0 + 0j)
    name: str = ""

    def __post_init__(self):
        topology = Topology(self.topology)
        object.__setattr__(self, "topology", topology)
        if not isinstance(self.arms, _VARIANTS[topology]):
            raise PyxbarValidationError(
                f"{topology.value} needs {_VARIANTS[topology].__name__}, got {type(self.arms).__name__}"
            )
        object.__setattr__(self, "resonators", dict(self.resonators))
        object.__setattr__(self, "spurs", {k: tuple(v) for k, v in self.spurs.items()})
        object.__setattr__(self, "ref_impedances", tuple(as_ref_impedances(self.ref_impedances)))
        missing = [n for n in self.arm_names() if n not in self.resonators]
        if missing:
            raise PyxbarValidationError(f"Arms refer to unknown resonators: {missing}")
        unknown = [n for n in self.spurs if n not in self.resonators]
        if unknown:
            raise PyxbarValidationError(f"Spurs given for unknown resonators: {unknown}")
        if topology is Topology.LADDER and len(self.arm_names(unique=False)) < 2:
            raise EmptyDesign("A ladder design needs at least two resonators")
        for n in self.spurs:
            self.resonator(n)

    def arm_names(self, unique=True):
        arms = self.arms
        if isinstance(arms, LadderArms):
            names = list(arms.series) + list(arms.shunt)
        elif isinstance(arms, BalancedArms):
            names = [arms.a1, arms.a2, arms.a2, arms.b, arms.b]
        else:
            names = [arms.a, arms.a, arms.b, arms.b]
        return list(dict.fromkeys(names)) if unique else names

    def resonator(self, name) -> MbvdParams:
        """Resonator ``name`` with its spurious branches injected"""
        p = self.resonators[name]
        for spur in self.spurs.get(name, ()):
            p = add_spur(p, spur)
        return p

    def without_spurs(self):
        return dataclasses.replace(self, spurs={})

    def map_resonator(self, name, func):
        """Apply ``func`` to a resonator (spurs included) and store the result back"""
        base = self.resonators[name]
        transformed = func(self.resonator(name))
        n = base.n_branches
        resonators = dict(self.resonators)
        resonators[name] = dataclasses.replace(transformed, branches=transformed.branches[:n])
        spurs = dict(self.spurs)
        if name in spurs:
            spurs[name] = transformed.branches[n:]
        return dataclasses.replace(self, resonators=resonators, spurs=spurs)

    def build_netlist(self) -> Netlist:
        arms, r = self.arms, self.resonator
        if self.topology is Topology.CANONICAL_LATTICE:
            return build_canonical_lattice(r(arms.a), r(arms.b))
        if self.topology is Topology.DIRECT_LATTICE:
            return build_direct_lattice(
                r(arms.a), r(arms.b), arms.grounds, arms.fourth_arm, arms.return_path
            )
        if self.topology is Topology.LAYOUT_BALANCED:
            return build_layout_balanced(r(arms.a1), r(arms.a2), r(arms.b))
        return build_ladder([r(n) for n in arms.series], [r(n) for n in arms.shunt])

    @property
    def resonator_count(self):
        return len(self.arm_names(unique=False))

    def footprint(self) -> Optional[float]:
        """Total active area of all arm resonators, or None if any lacks geometry"""
        areas = []
        for n in self.arm_names(unique=False):
            geometry = self.resonators[n].geometry
            if geometry is None:
                return None
            areas.append(geometry.area)
        return float(sum(areas))

    # --- dictionaries --------------------------------------------------------

    def to_dict(self) -> Dict:
        arms = self.arms
        if isinstance(arms, LadderArms):
            arms_d = {"series": list(arms.series), "shunt": list(arms.shunt)}
        elif isinstance(arms, BalancedArms):
            arms_d = {"a1": arms.a1, "a2": arms.a2, "b": arms.b}
        else:
            arms_d = {"a": arms.a, "b": arms.b}
        d = {
            "topology": self.topology.value,
            "resonators": {n: p.to_dict() for n, p in self.resonators.items()},
            "arms": arms_d,
        }
        if isinstance(arms, DirectLatticeArms):
            layout = {"grounds": arms.grounds, "fourth_arm": arms.fourth_arm}
            if arms.return_path is not None:
                layout["return_path"] = dataclasses.asdict(arms.return_path)
            d["layout"] = layout
        if self.spurs:
            d["spurs"] = {n: [b.to_dict() for b in s] for n, s in self.spurs.items()}
        refs = [complex(z) for z in self.ref_impedances]
        if refs != [50, 50]:
            d["ref_impedances_ohm"] = [[z.real, z.imag] for z in refs]
        if self.name:
            d["name"] = self.name
        return d

    @classmethod
    def from_dict(cls, d) -> "FilterDesign":
        topology = Topology(d["topology"])
        arms_d = d["arms"]
        if topology is Topology.LADDER:
            arms = LadderArms(arms_d.get("series", ()), arms_d.get("shunt", ()))
        elif topology is Topology.LAYOUT_BALANCED:
            arms = BalancedArms(arms_d["a1"], arms_d["a2"], arms_d["b"])
        elif topology is Topology.DIRECT_LATTICE:
            layout = d.get("layout", {})
            rp = layout.get("return_path")
            arms = DirectLatticeArms(
                arms_d["a"],
                arms_d["b"],
                grounds=layout.get("grounds", "separate"),
                fourth_arm=layout.get("fourth_arm", "present"),
                return_path=None if rp is None else ReturnPath(**rp),
            )
        else:
            arms = LatticeArms(arms_d["a"], arms_d["b"])
        refs = d.get("ref_impedances_ohm")
        refs = (50.0, 50.0) if refs is None else tuple(complex(re, im) for re, im in refs)
        logger.debug(f"Building {topology.value} design {d.get('name', '')!r}")
        return cls(
            topology=topology,
            arms=arms,
            resonators={n: MbvdParams.from_dict(p) for n, p in d["resonators"].items()},
            spurs={
                n: tuple(MotionalBranch.from_dict(b) for b in s)
                for n, s in d.get("spurs", {}).items()
            },
            ref_impedances=refs,
            name=d.get("name", ""),
        )
