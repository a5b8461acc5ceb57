"""
Matching
========
Simultaneous conjugate matching of a two-port.

For a two-port with scattering matrix ``S`` at a real reference ``Z0``::

    Delta = S11 S22 - S12 S21
    B_i   = 1 + |S_ii|^2 - |S_jj|^2 - |Delta|^2
    C_i   = S_ii - Delta conj(S_jj)
    Gamma_m,i = (B_i -/+ sqrt(B_i^2 - 4 |C_i|^2)) / (2 C_i)
    Z_0,i = Z0 (1 + Gamma_m,i) / (1 - Gamma_m,i)

with ``i, j`` in ``{1, 2}``, ``i != j``. Of the two roots the one with
``|Gamma| <= 1`` is kept. A solution exists when ``B_i^2 >= 4 |C_i|^2``,
which for passive reciprocal networks is the same as Rollett's ``K >= 1``.

The match is applied by renormalizing the whole sweep to ``(Z_0,1, Z_0,2)``
rather than by synthesizing a network; :func:`synthesize_l_section` is there
for when a lumped realization at a single frequency is wanted.
"""

from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from .errors import (
    DegenerateDenominator,
    InfeasibleMatch,
    KindMismatch,
    NonPositiveMatchResistance,
    PyxbarValidationError,
    UnilateralNetwork,
)
from .logging import logger
from .netcore import Kind, SweepResponse, TwoPortMatrix, renormalize

MATCHED_TOLERANCE = 1e-15
"""float : |C_i| below which a port counts as already matched (Gamma = 0)."""

BOUNDARY_TOLERANCE = 1e-12
"""float : Relative discriminant below which a match sits on the K = 1 boundary."""


@dataclass(frozen=True)
class MatchSolution:
    f_design: Optional[float]
    gamma_m: Tuple[complex, complex]
    z0_match: Optional[Tuple[complex, complex]]
    b: Tuple[float, float]
    c: Tuple[complex, complex]
    delta: complex
    rollett_k: float
    feasible: bool
    boundary: bool = False
    z0: float = 50.0

    def to_dict(self):
        def cplx(z):
            return None if z is None else [float(np.real(z)), float(np.imag(z))]

        return {
            "f_design_hz": self.f_design,
            "z0_ohm": self.z0,
            "gamma_m": [cplx(g) for g in self.gamma_m],
            "z0_match_ohm": None if self.z0_match is None else [cplx(z) for z in self.z0_match],
            "b": [float(x) for x in self.b],
            "c": [cplx(x) for x in self.c],
            "delta": cplx(self.delta),
            "rollett_k": float(self.rollett_k),
            "feasible": self.feasible,
            "boundary": self.boundary,
        }


def _entries(s):
    if s.kind is not Kind.S:
        raise KindMismatch(f"Matching needs S-parameters, got {s.kind.value}")
    e = s.entries
    return e[0, 0], e[0, 1], e[1, 0], e[1, 1]


def _real_reference(s: TwoPortMatrix, z0=None) -> float:
    refs = np.asarray(s.ref_impedances)
    if refs[0] != refs[1] or refs[0].imag != 0:
        raise PyxbarValidationError(
            f"Conjugate matching needs one real reference at both ports, got {refs.tolist()}"
        )
    if z0 is not None and not np.isclose(z0, refs[0].real, rtol=1e-12):
        raise PyxbarValidationError(
            f"Z0 = {z0} ohm does not match the S-parameter reference {refs[0].real} ohm"
        )
    return float(refs[0].real)


def rollett_k(s: TwoPortMatrix) -> float:
    """Rollett stability factor ``K = (1 - |S11|^2 - |S22|^2 + |Delta|^2) / (2 |S12 S21|)``"""
    s11, s12, s21, s22 = _entries(s)
    product = abs(s12 * s21)
    if product == 0:
        raise UnilateralNetwork("Rollett K is undefined for S12 * S21 = 0")
    delta = s11 * s22 - s12 * s21
    return float((1 - abs(s11) ** 2 - abs(s22) ** 2 + abs(delta) ** 2) / (2 * product))


def max_available_gain(s: TwoPortMatrix) -> float:
    """``G_max = |S21 / S12| (K - sqrt(K^2 - 1))`` for ``K >= 1``"""
    _, s12, s21, _ = _entries(s)
    k = rollett_k(s)
    if k < 1:
        raise InfeasibleMatch(f"G_max is undefined for K = {k:.6g} < 1", rollett_k=k)
    return float(abs(s21 / s12) * (k - np.sqrt(k * k - 1)))


def transducer_gain(s: TwoPortMatrix, gamma_s: complex, gamma_l: complex) -> float:
    """Transducer power gain with source/load reflection coefficients ``gamma_s``/``gamma_l``"""
    s11, s12, s21, s22 = _entries(s)
    num = abs(s21) ** 2 * (1 - abs(gamma_s) ** 2) * (1 - abs(gamma_l) ** 2)
    den = abs((1 - s11 * gamma_s) * (1 - s22 * gamma_l) - s12 * s21 * gamma_s * gamma_l) ** 2
    return float(num / den)


def input_reflection(s: TwoPortMatrix, gamma_l: complex) -> complex:
    s11, s12, s21, s22 = _entries(s)
    return s11 + s12 * s21 * gamma_l / (1 - s22 * gamma_l)


def output_reflection(s: TwoPortMatrix, gamma_s: complex) -> complex:
    s11, s12, s21, s22 = _entries(s)
    return s22 + s12 * s21 * gamma_s / (1 - s11 * gamma_s)


def _gamma(b, c):
    if abs(c) < MATCHED_TOLERANCE:
        return 0j, False
    disc = b * b - 4 * abs(c) ** 2
    boundary = disc <= BOUNDARY_TOLERANCE * b * b
    root = np.sqrt(max(disc, 0.0))
    minus = (b - root) / (2 * c)
    if abs(minus) <= 1:
        return complex(minus), boundary
    return complex((b + root) / (2 * c)), boundary


def conjugate_match(
    s: TwoPortMatrix, z0: Optional[float] = None, f_design: Optional[float] = None
) -> MatchSolution:
    """
    Simultaneous conjugate match of ``s``.

    Parameters
    ----------
    s : TwoPortMatrix
        S-parameters with the same real reference impedance at both ports.
    z0 : float, optional
        The reference impedance, checked against ``s``.
    f_design : float, optional
        Frequency the matrix belongs to; only recorded in the solution.

    Raises
    ------
    InfeasibleMatch
        If ``B_i^2 < 4 |C_i|^2`` for a port. ``rollett_k`` is attached.
    DegenerateDenominator
        If a matching reflection coefficient is (numerically) ``+1``, i.e. the
        match degenerates to an open circuit, as on the ``K = 1`` boundary. The
        solution, with ``boundary=True``, is attached as ``solution``.
    """
    s11, s12, s21, s22 = _entries(s)
    z0 = _real_reference(s, z0)
    delta = s11 * s22 - s12 * s21
    try:
        k = rollett_k(s)
    except UnilateralNetwork:
        k = np.inf
    b = (
        1 + abs(s11) ** 2 - abs(s22) ** 2 - abs(delta) ** 2,
        1 + abs(s22) ** 2 - abs(s11) ** 2 - abs(delta) ** 2,
    )
    c = (s11 - delta * np.conj(s22), s22 - delta * np.conj(s11))
    discriminants = [bi * bi - 4 * abs(ci) ** 2 for bi, ci in zip(b, c)]
    feasible = all(
        d >= 0 or abs(ci) < MATCHED_TOLERANCE or d >= -BOUNDARY_TOLERANCE * bi * bi
        for d, bi, ci in zip(discriminants, b, c)
    )
    if not feasible:
        logger.warning(f"No simultaneous conjugate match exists (K = {k:.6g})")
        raise InfeasibleMatch(
            f"No simultaneous conjugate match: B^2 - 4|C|^2 = {min(discriminants):.3e} < 0 "
            f"(Rollett K = {k:.6g})",
            rollett_k=k,
        )
    gammas, flags = zip(*(_gamma(bi, ci) for bi, ci in zip(b, c)))
    boundary = any(flags)
    degenerate = [abs(1 - g) < MATCHED_TOLERANCE for g in gammas]
    z_match = None
    if not any(degenerate):
        z_match = tuple(complex(z0 * (1 + g) / (1 - g)) for g in gammas)
    solution = MatchSolution(
        f_design=f_design,
        gamma_m=tuple(gammas),
        z0_match=z_match,
        b=tuple(float(x) for x in b),
        c=tuple(complex(x) for x in c),
        delta=complex(delta),
        rollett_k=k,
        feasible=True,
        boundary=boundary,
        z0=z0,
    )
    if any(degenerate):
        ports = [i + 1 for i, d in enumerate(degenerate) if d]
        logger.warning(f"Match degenerates to an open circuit at port(s) {ports} (K = {k:.6g})")
        raise DegenerateDenominator(
            f"Gamma_m = 1 at port(s) {ports}: the matching impedance is an open circuit",
            solution=solution,
        )
    if boundary:
        logger.warning(f"Match sits on the stability boundary (K = {k:.6g})")
    logger.debug(f"Matching impedances: {z_match}")
    return solution


def match_frequency(r: SweepResponse) -> float:
    """Default design frequency: the point of maximum |S21|"""
    return float(r.grid.points[int(np.argmax(np.abs(r.param(2, 1))))])


def match_sweep(r: SweepResponse, f_design: Optional[float] = None) -> MatchSolution:
    """Solve the conjugate match at ``f_design`` (default: max |S21|) on a sweep"""
    if r.kind is not Kind.S:
        raise KindMismatch(f"Matching needs S-parameters, got {r.kind.value}")
    if f_design is None:
        f_design = match_frequency(r)
    i = r.nearest_index(f_design)
    return conjugate_match(r[i], f_design=float(r.grid.points[i]))


def apply_match(r: SweepResponse, sol: MatchSolution) -> SweepResponse:
    """Renormalize the whole sweep to the matching impedances of ``sol``"""
    if not sol.feasible or sol.z0_match is None:
        raise InfeasibleMatch("Cannot apply an infeasible match", rollett_k=sol.rollett_k)
    for i, z in enumerate(sol.z0_match):
        if z.real <= 0:
            raise NonPositiveMatchResistance(
                f"Matching impedance at port {i + 1} has Re = {z.real:.6g} <= 0"
            )
    return renormalize(r, sol.z0_match)


# -----------------------------------------------------------------------------
# L-section synthesis
# -----------------------------------------------------------------------------


@dataclass(frozen=True)
class LSection:
    """
    Lossless two-element match from a load to a real source impedance.

    ``layout`` is ``"shunt-first"`` when the shunt element sits across the load
    (used for Re(Z_load) > Z0) and ``"series-first"`` otherwise. ``reactance``
    is the series reactance X and ``susceptance`` the shunt susceptance B, both
    at ``frequency``.
    """

    layout: str
    reactance: float
    susceptance: float
    frequency: float

    @property
    def elements(self) -> List[Tuple[str, str, float]]:
        w = 2 * np.pi * self.frequency
        x, b = self.reactance, self.susceptance
        series = ("series", "L", x / w) if x >= 0 else ("series", "C", -1 / (w * x))
        shunt = ("shunt", "C", b / w) if b >= 0 else ("shunt", "L", -1 / (w * b))
        return [shunt, series] if self.layout == "shunt-first" else [series, shunt]

    def input_impedance(self, z_load: complex) -> complex:
        """Impedance seen by the source when the section terminates ``z_load``"""
        if self.layout == "shunt-first":
            return 1j * self.reactance + 1 / (1j * self.susceptance + 1 / z_load)
        return 1 / (1j * self.susceptance + 1 / (z_load + 1j * self.reactance))


def synthesize_l_section(z_load: complex, z0: float, frequency: float) -> List[LSection]:
    """Both L-section solutions matching ``z_load`` to the real impedance ``z0``"""
    rl, xl = z_load.real, z_load.imag
    if rl <= 0 or z0 <= 0:
        raise NonPositiveMatchResistance("L-section synthesis needs Re(Z_load) > 0 and Z0 > 0")
    sections = []
    if rl > z0:
        root = np.sqrt(rl / z0) * np.sqrt(rl**2 + xl**2 - z0 * rl)
        for sign in (1, -1):
            b = (xl + sign * root) / (rl**2 + xl**2)
            x = 1 / b + xl * z0 / rl - z0 / (b * rl)
            sections.append(LSection("shunt-first", float(x), float(b), frequency))
    else:
        root = np.sqrt(rl * (z0 - rl))
        for sign in (1, -1):
            x = sign * root - xl
            b = sign * np.sqrt((z0 - rl) / rl) / z0
            sections.append(LSection("series-first", float(x), float(b), frequency))
    return sections
