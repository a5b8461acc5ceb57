"""
MNA
===
A small nodal-analysis engine. A :class:`Netlist` is a set of nodes joined by
two-terminal admittance branches; :func:`reduce` turns it into the port-level
admittance matrix by stamping, grounding and eliminating every internal node.

Branches carry *evaluators* ``Y(f)`` instead of element types, so a resistor, a
capacitor or a whole multi-mode resonator all enter the same way. Evaluators are
called with a NumPy array of frequencies and must return an array of complex
admittances of the same shape.

Ports are ``(hot, reference)`` node pairs. The reference can be ground or any
other node, which is how separate ground pads are modelled. Subcircuits that
are not connected to ground are anchored at their first port reference node;
anything that is left floating after that shows up as a vanishing pivot during
elimination and raises :class:`~pyxbar.errors.FloatingNode`.

Examples
--------
>>> import numpy as np
>>> pi = Netlist.from_branches(
...     [
...         Branch("1", "0", conductance(1.0)),
...         Branch("1", "2", conductance(2.0)),
...         Branch("2", "0", conductance(3.0)),
...     ],
...     ports=[("1", "0"), ("2", "0")],
... )
>>> reduce(pi, 1e9).matrix.real
array([[ 3., -2.],
       [-2.,  5.]])
"""

from dataclasses import dataclass, field, replace
from typing import Callable, Hashable, Optional, Sequence, Tuple

import numpy as np

from .errors import FloatingNode, PyxbarValidationError
from .logging import logger
from .netcore import DEFAULT_REFERENCE, SINGULAR_TOLERANCE, FrequencyGrid, Kind, SweepResponse, convert

STIFF_SHORT = 1e12
"""float : Admittance in siemens used to emulate an ideal short with a branch."""

GROUND = "0"

Node = Hashable


# -----------------------------------------------------------------------------
# Element evaluators
# -----------------------------------------------------------------------------


def conductance(g):
    return lambda f: np.full(np.shape(f), g, dtype=complex)


def resistor(r):
    return conductance(1.0 / r)


def capacitor(c):
    return lambda f: 2j * np.pi * np.asarray(f) * c


def inductor(inductance):
    return lambda f: 1.0 / (2j * np.pi * np.asarray(f) * inductance)


def series_rl(r, inductance):
    return lambda f: 1.0 / (r + 2j * np.pi * np.asarray(f) * inductance)


def scaled(evaluator, alpha):
    return lambda f: alpha * evaluator(f)


def stiff_short():
    return conductance(STIFF_SHORT)


# -----------------------------------------------------------------------------
# Netlist
# -----------------------------------------------------------------------------


@dataclass(frozen=True)
class Branch:
    node_a: Node
    node_b: Node
    admittance: Callable
    label: str = ""

    def renamed(self, mapping):
        return replace(
            self,
            node_a=mapping.get(self.node_a, self.node_a),
            node_b=mapping.get(self.node_b, self.node_b),
        )


@dataclass(frozen=True)
class Annotation:
    """A branch kept for bookkeeping only; it does not take part in the analysis"""

    branch: Branch
    reason: str


@dataclass(frozen=True)
class Netlist:
    nodes: Tuple[Node, ...]
    branches: Tuple[Branch, ...]
    ports: Tuple[Tuple[Node, Node], ...]
    ground: Node = GROUND
    annotations: Tuple[Annotation, ...] = field(default_factory=tuple)

    def __post_init__(self):
        nodes = tuple(self.nodes)
        if len(set(nodes)) != len(nodes):
            raise PyxbarValidationError(f"Duplicate node ids in {nodes}")
        if self.ground not in nodes:
            nodes = (self.ground,) + nodes
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "branches", tuple(self.branches))
        object.__setattr__(self, "ports", tuple(tuple(p) for p in self.ports))
        object.__setattr__(self, "annotations", tuple(self.annotations))
        if not self.branches:
            raise PyxbarValidationError("A netlist needs at least one branch")
        known = set(nodes)
        for b in self.branches:
            if b.node_a not in known or b.node_b not in known:
                raise PyxbarValidationError(f"Branch {b.label or b} uses an undeclared node")
            if b.node_a == b.node_b:
                raise PyxbarValidationError(
                    f"Branch {b.label!r} connects node {b.node_a!r} to itself"
                )
        if not self.ports:
            raise PyxbarValidationError("A netlist needs at least one port")
        hots = [hot for hot, _ in self.ports]
        refs = {ref for _, ref in self.ports}
        for hot, ref in self.ports:
            if hot not in known or ref not in known:
                raise PyxbarValidationError(f"Port ({hot!r}, {ref!r}) uses an undeclared node")
            if hot == ref:
                raise PyxbarValidationError(f"Port hot and reference are both {hot!r}")
        if len(set(hots)) != len(hots) or refs & set(hots) or self.ground in hots:
            raise PyxbarValidationError(
                "Port hot nodes must be distinct and may not be ground or another port's reference"
            )

    @classmethod
    def from_branches(cls, branches, ports, ground=GROUND, annotations=()):
        """Build a netlist, collecting node ids from branches and ports in order"""
        nodes = []
        for b in branches:
            nodes.extend([b.node_a, b.node_b])
        for p in ports:
            nodes.extend(p)
        unique = list(dict.fromkeys(n for n in nodes))
        return cls(tuple(unique), tuple(branches), tuple(ports), ground, tuple(annotations))

    @property
    def n_ports(self):
        return len(self.ports)

    def with_branch(self, branch: Branch):
        nodes = self.nodes + tuple(
            n for n in dict.fromkeys((branch.node_a, branch.node_b)) if n not in self.nodes
        )
        return replace(self, nodes=nodes, branches=self.branches + (branch,))

    def tie(self, keep: Node, drop: Node, reason="tied"):
        """Merge node ``drop`` into ``keep``; branches that collapse become annotations"""
        mapping = {drop: keep}
        branches, annotations = [], list(self.annotations)
        for b in self.branches:
            renamed = b.renamed(mapping)
            if renamed.node_a == renamed.node_b:
                logger.debug(f"Branch {b.label!r} is shorted by tying {drop!r} to {keep!r}")
                annotations.append(Annotation(b, f"shorted ({reason})"))
            else:
                branches.append(renamed)
        ports = [tuple(mapping.get(n, n) for n in p) for p in self.ports]
        nodes = tuple(n for n in self.nodes if n != drop)
        return Netlist(nodes, tuple(branches), tuple(ports), self.ground, tuple(annotations))


@dataclass(frozen=True)
class ReducedYMatrix:
    frequency: float
    matrix: np.ndarray


# -----------------------------------------------------------------------------
# Reduction
# -----------------------------------------------------------------------------


def _components(netlist):
    parent = {n: n for n in netlist.nodes}

    def find(n):
        while parent[n] != n:
            parent[n] = parent[parent[n]]
            n = parent[n]
        return n

    for b in netlist.branches:
        ra, rb = find(b.node_a), find(b.node_b)
        if ra != rb:
            parent[ra] = rb
    return find


def _datum_nodes(netlist):
    """Ground plus one anchor per ungrounded subcircuit that carries a port reference"""
    find = _components(netlist)
    grounded = {find(netlist.ground)}
    datums = [netlist.ground]
    for _, ref in netlist.ports:
        root = find(ref)
        if root not in grounded:
            grounded.add(root)
            datums.append(ref)
            logger.debug(f"Anchoring floating subcircuit at port reference {ref!r}")
    return datums


def _port_transform(netlist, active):
    """Coordinates: port voltages first, then internal node voltages"""
    index = {n: i for i, n in enumerate(active)}
    hots = [hot for hot, _ in netlist.ports]
    internal = [n for n in active if n not in hots]
    cols = {n: netlist.n_ports + i for i, n in enumerate(internal)}
    T = np.zeros((len(active), len(active)))
    for p, (hot, ref) in enumerate(netlist.ports):
        T[index[hot], p] = 1.0
        if ref in cols:
            T[index[hot], cols[ref]] = 1.0
    for n in internal:
        T[index[n], cols[n]] = 1.0
    return T, internal


def reduce_array(netlist: Netlist, frequencies) -> np.ndarray:
    """Port admittance matrices for every frequency, shape ``(n, ports, ports)``"""
    f = np.atleast_1d(np.asarray(frequencies, dtype=float))
    datums = _datum_nodes(netlist)
    active = [n for n in netlist.nodes if n not in datums]
    index = {n: i for i, n in enumerate(active)}
    m = len(active)

    ynode = np.zeros((f.size, m, m), dtype=complex)
    for b in netlist.branches:
        y = np.broadcast_to(np.asarray(b.admittance(f), dtype=complex), f.shape)
        ia, ib = index.get(b.node_a), index.get(b.node_b)
        if ia is not None:
            ynode[:, ia, ia] += y
        if ib is not None:
            ynode[:, ib, ib] += y
        if ia is not None and ib is not None:
            ynode[:, ia, ib] -= y
            ynode[:, ib, ia] -= y

    T, internal = _port_transform(netlist, active)
    y = T.T @ ynode @ T
    # Kron elimination of internal nodes, last coordinate first
    for node in reversed(internal):
        k = y.shape[-1] - 1
        pivot = y[:, k, k]
        scale = np.sqrt(np.sum(np.abs(y) ** 2, axis=(-2, -1)))
        bad = np.abs(pivot) < SINGULAR_TOLERANCE * scale
        if np.any(bad):
            first = int(np.argmax(bad))
            raise FloatingNode(node, float(f[first]))
        y = y[:, :k, :k] - y[:, :k, k:k + 1] * y[:, k:k + 1, :k] / pivot[:, None, None]
    return y


def reduce(netlist: Netlist, f) -> ReducedYMatrix:
    """
    Reduce a netlist to its port admittance matrix at a single frequency.

    Parameters
    ----------
    netlist : Netlist
    f : float
        Frequency in Hz.

    Raises
    ------
    FloatingNode
        When an internal node has no path to a datum node at ``f``.
    """
    return ReducedYMatrix(float(f), reduce_array(netlist, [f])[0])


def sweep_reduce(
    netlist: Netlist,
    grid: FrequencyGrid,
    to_s: bool = False,
    ref_impedances: Optional[Sequence[complex]] = None,
) -> SweepResponse:
    """
    Reduce a two-port netlist over a whole grid.

    With ``to_s`` the result is converted to scattering parameters at
    ``ref_impedances`` (default 50 ohm at both ports).
    """
    if netlist.n_ports != 2:
        raise PyxbarValidationError(
            f"sweep_reduce builds two-port sweeps, netlist has {netlist.n_ports} ports"
        )
    y = reduce_array(netlist, grid.points)
    response = SweepResponse(grid, Kind.Y, y)
    if to_s:
        return convert(response, Kind.S, DEFAULT_REFERENCE if ref_impedances is None else ref_impedances)
    return response
