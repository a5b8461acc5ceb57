"""
Resonator
=========
The multi-mode modified Butterworth-Van Dyke (mBVD) resonator model::

    o--[Rs]--[Ls]--+--------------+-------------+-- ... --+
                   |              |             |         |
                  [R0]          [Rm1]         [Rm2]     [RmN]
                  [C0]          [Lm1]         [Lm2]     [LmN]
                   |            [Cm1]         [Cm2]     [CmN]
    o--------------+--------------+-------------+-- ... --+

Each motional branch models one acoustic mode (``S2``, ``A1``, ``A3``, ...). The
static branch ``R0 + C0`` and every motional branch are in parallel; ``Rs`` and
``Ls`` are in series with the whole core.

Conventions used for derived quantities:

* series resonance ``f_s = 1 / (2 pi sqrt(Lm Cm))``
* antiresonance ``f_p``: zero of ``Im Y`` above ``f_s``, seeded by the isolated
  lossless value ``f_s sqrt(1 + Cm/C0)``
* coupling ``k2 = (f_p**2 - f_s**2) / f_p**2``
* branch quality factor ``Q = sqrt(Lm/Cm) / Rm``

Examples
--------
>>> b = MotionalBranch(rm=0.0, lm=63.33e-9, cm=1e-15, mode=ModeLabel.parse("S2"))
>>> round(series_resonance(b) / 1e9, 3)
19.999
"""

import dataclasses
import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Tuple

import numpy as np
import pandas as pd
from scipy.optimize import brentq

from .errors import DuplicateResonance, PyxbarValidationError, RootNotBracketed
from .logging import logger

SEPARATION_MIN = 1e-3
"""float : Minimal relative spacing between two branch series resonances."""

ANTIRESONANCE_WINDOW = 0.10
"""float : Relative half-width of the window searched around the f_p seed."""

ANTIRESONANCE_SCAN_POINTS = 4001

_TINY = np.finfo(float).tiny


class ModeFamily(str, Enum):
    SYMMETRIC = "S"
    ANTISYMMETRIC = "A"


@dataclass(frozen=True)
class ModeLabel:
    family: ModeFamily = ModeFamily.SYMMETRIC
    order: int = 1

    _PATTERN = re.compile(r"^(?P<family>[SA])(?P<order>\d+)$")

    def __post_init__(self):
        object.__setattr__(self, "family", ModeFamily(self.family))
        if int(self.order) < 1:
            raise PyxbarValidationError(f"Mode order must be >= 1, got {self.order}")
        object.__setattr__(self, "order", int(self.order))

    @classmethod
    def parse(cls, label: str) -> "ModeLabel":
        match = cls._PATTERN.match(str(label).strip().upper())
        if not match:
            raise PyxbarValidationError(
                f"Mode label {label!r} must look like S2 or A1 (family letter + order)"
            )
        return cls(ModeFamily(match["family"]), int(match["order"]))

    def __str__(self):
        return f"{self.family.value}{self.order}"


@dataclass(frozen=True)
class MotionalBranch:
    rm: float
    lm: float
    cm: float
    mode: ModeLabel = field(default_factory=ModeLabel)

    def __post_init__(self):
        if isinstance(self.mode, str):
            object.__setattr__(self, "mode", ModeLabel.parse(self.mode))
        if not (self.lm > 0 and self.cm > 0):
            raise PyxbarValidationError(
                f"Motional lm and cm must be > 0 (got lm={self.lm}, cm={self.cm})"
            )
        if self.rm < 0:
            raise PyxbarValidationError(f"Motional rm must be >= 0, got {self.rm}")

    @property
    def fs(self):
        return series_resonance(self)

    def to_dict(self):
        return {"rm": self.rm, "lm": self.lm, "cm": self.cm, "mode": str(self.mode)}

    @classmethod
    def from_dict(cls, d):
        return cls(
            rm=float(d["rm"]),
            lm=float(d["lm"]),
            cm=float(d["cm"]),
            mode=ModeLabel.parse(d.get("mode", "S1")),
        )


@dataclass(frozen=True)
class ResonatorGeometry:
    """
    Interdigitated-electrode geometry attached to a resonator as metadata.

    Only used to derive admittance scale factors between resonators of the same
    technology (electrode count and length ratios); no physics is derived from it.
    """

    n_e: int
    l_e: float
    w_e: float
    w_g: float
    t1: Optional[float] = None
    t2: Optional[float] = None

    def __post_init__(self):
        if int(self.n_e) < 1:
            raise PyxbarValidationError(f"Electrode count must be >= 1, got {self.n_e}")
        object.__setattr__(self, "n_e", int(self.n_e))
        for name in ("l_e", "w_e", "w_g", "t1", "t2"):
            value = getattr(self, name)
            if value is not None and not value > 0:
                raise PyxbarValidationError(f"Geometry length {name} must be > 0, got {value}")

    @property
    def pitch(self):
        return self.w_e + self.w_g

    @property
    def area(self):
        """Active area ``N_e * pitch * l_e`` in square metres"""
        return self.n_e * self.pitch * self.l_e

    def to_dict(self):
        d = dataclasses.asdict(self)
        return {k: v for k, v in d.items() if v is not None}

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        pitch = d.pop("pitch", None)
        geometry = cls(**d)
        if pitch is not None and not np.isclose(pitch, geometry.pitch, rtol=1e-9):
            raise PyxbarValidationError(
                f"pitch {pitch} does not equal w_e + w_g = {geometry.pitch}"
            )
        return geometry


@dataclass(frozen=True)
class MbvdParams:
    c0: float
    branches: Tuple[MotionalBranch, ...]
    r0: float = 0.0
    rs: float = 0.0
    ls: float = 0.0
    geometry: Optional[ResonatorGeometry] = None

    def __post_init__(self):
        object.__setattr__(self, "branches", tuple(self.branches))
        if not self.c0 > 0:
            raise PyxbarValidationError(f"c0 must be > 0, got {self.c0}")
        for name in ("r0", "rs", "ls"):
            if getattr(self, name) < 0:
                raise PyxbarValidationError(f"{name} must be >= 0, got {getattr(self, name)}")
        if not self.branches:
            raise PyxbarValidationError("An mBVD model needs at least one motional branch")
        _check_separation(self.branches)

    @property
    def n_branches(self):
        return len(self.branches)

    def to_dict(self):
        d = {
            "c0": self.c0,
            "r0": self.r0,
            "rs": self.rs,
            "ls": self.ls,
            "branches": [b.to_dict() for b in self.branches],
        }
        if self.geometry is not None:
            d["geometry"] = self.geometry.to_dict()
        return d

    @classmethod
    def from_dict(cls, d):
        geometry = d.get("geometry")
        return cls(
            c0=float(d["c0"]),
            r0=float(d.get("r0", 0.0)),
            rs=float(d.get("rs", 0.0)),
            ls=float(d.get("ls", 0.0)),
            branches=tuple(MotionalBranch.from_dict(b) for b in d["branches"]),
            geometry=None if geometry is None else ResonatorGeometry.from_dict(geometry),
        )


def _check_separation(branches):
    fs = sorted((b.fs, str(b.mode)) for b in branches)
    for (f1, m1), (f2, m2) in zip(fs, fs[1:]):
        if (f2 - f1) / f1 <= SEPARATION_MIN:
            raise DuplicateResonance(
                f"Branches {m1} ({f1:.6g} Hz) and {m2} ({f2:.6g} Hz) are closer than "
                f"{SEPARATION_MIN:.1%}"
            )


# -----------------------------------------------------------------------------
# Evaluation
# -----------------------------------------------------------------------------


def _inv(z):
    z = np.where(z == 0, _TINY, z)
    return 1.0 / z


def admittance(p: MbvdParams, f):
    """
    Complex admittance of the mBVD model at ``f`` (scalar or array, Hz).

    A lossless branch evaluated exactly at its series resonance has zero
    impedance; the result is then a very large but finite admittance.
    """
    f = np.asarray(f, dtype=float)
    w = 2 * np.pi * f
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        y_core = _inv(p.r0 + 1.0 / (1j * w * p.c0))
        for b in p.branches:
            y_core = y_core + _inv(b.rm + 1j * w * b.lm + 1.0 / (1j * w * b.cm))
        y = _inv(p.rs + 1j * w * p.ls + _inv(y_core))
    return y[()] if y.ndim == 0 else y


def admittance_evaluator(p: MbvdParams):
    """Branch evaluator for :mod:`pyxbar.mna`"""
    return lambda f: admittance(p, f)


def series_resonance(b: MotionalBranch) -> float:
    return 1.0 / (2 * np.pi * np.sqrt(b.lm * b.cm))


def branch_q(b: MotionalBranch) -> float:
    if b.rm == 0:
        return np.inf
    return np.sqrt(b.lm / b.cm) / b.rm


def _is_lossless_isolated(p):
    return p.n_branches == 1 and p.r0 == p.rs == p.ls == 0 and p.branches[0].rm == 0


def antiresonance(p: MbvdParams, index: int) -> float:
    """
    Antiresonance belonging to branch ``index``.

    The isolated lossless value ``f_s sqrt(1 + cm/c0)`` seeds a dense scan of
    ``Im Y`` over +-10% around it; the upward zero crossing nearest the seed is
    then refined with Brent's method to a relative tolerance of 1e-10.

    Raises
    ------
    RootNotBracketed
        If ``Im Y`` has no upward zero crossing inside the window.
    """
    b = p.branches[index]
    seed = series_resonance(b) * np.sqrt(1.0 + b.cm / p.c0)
    if _is_lossless_isolated(p):
        return seed

    def im_y(f):
        return float(np.imag(admittance(p, f)))

    f = np.linspace(seed * (1 - ANTIRESONANCE_WINDOW), seed * (1 + ANTIRESONANCE_WINDOW), ANTIRESONANCE_SCAN_POINTS)
    im = np.imag(admittance(p, f))
    upward = np.flatnonzero((im[:-1] <= 0) & (im[1:] > 0))
    if upward.size == 0:
        raise RootNotBracketed(
            f"No Im(Y) zero crossing within +-{ANTIRESONANCE_WINDOW:.0%} of {seed:.6g} Hz "
            f"for branch {b.mode} (heavily damped?)"
        )
    i = upward[np.argmin(np.abs(f[upward] - seed))]
    if im[i] == 0:
        return float(f[i])
    return brentq(im_y, f[i], f[i + 1], xtol=1e-10 * seed, rtol=1e-10)


def coupling(p: MbvdParams, index: int) -> float:
    """Electromechanical coupling ``k2 = (f_p**2 - f_s**2) / f_p**2``"""
    fs = series_resonance(p.branches[index])
    fp = antiresonance(p, index)
    return (fp**2 - fs**2) / fp**2


# -----------------------------------------------------------------------------
# Transformations
# -----------------------------------------------------------------------------


def scale(p: MbvdParams, alpha: float) -> MbvdParams:
    """
    Parameters whose admittance is exactly ``alpha * Y(f)``.

    Capacitances scale with ``alpha``, resistances and inductances with
    ``1/alpha``; all resonance frequencies are unchanged.
    """
    if not alpha > 0:
        raise PyxbarValidationError(f"Scale factor must be > 0, got {alpha}")
    branches = tuple(
        MotionalBranch(rm=b.rm / alpha, lm=b.lm / alpha, cm=b.cm * alpha, mode=b.mode)
        for b in p.branches
    )
    return MbvdParams(
        c0=p.c0 * alpha,
        r0=p.r0 / alpha,
        rs=p.rs / alpha,
        ls=p.ls / alpha,
        branches=branches,
        geometry=p.geometry if alpha == 1 else None,
    )


def geometry_scale_factor(reference: ResonatorGeometry, target: ResonatorGeometry) -> float:
    """Admittance ratio between two resonators, taken as their active-area ratio"""
    return target.area / reference.area


def scale_to_geometry(p: MbvdParams, target: ResonatorGeometry) -> MbvdParams:
    if p.geometry is None:
        raise PyxbarValidationError("Resonator has no geometry attached to scale from")
    alpha = geometry_scale_factor(p.geometry, target)
    logger.debug(f"Scaling resonator by area ratio {alpha:.6g}")
    return dataclasses.replace(scale(p, alpha), geometry=target)


def add_spur(p: MbvdParams, spur: MotionalBranch) -> MbvdParams:
    """Append a spurious-mode branch, keeping the 0.1% separation rule"""
    return dataclasses.replace(p, branches=p.branches + (spur,))


def summary(p: MbvdParams) -> pd.DataFrame:
    """One row per branch: mode, f_s, f_p, k2 and Q"""
    rows = []
    for i, b in enumerate(p.branches):
        try:
            fp = antiresonance(p, i)
        except RootNotBracketed as e:
            logger.warning(f"{e}")
            fp = np.nan
        fs = series_resonance(b)
        rows.append(
            {
                "mode": str(b.mode),
                "fs_Hz": fs,
                "fp_Hz": fp,
                "k2": (fp**2 - fs**2) / fp**2,
                "q": branch_q(b),
                "rm_ohm": b.rm,
                "lm_H": b.lm,
                "cm_F": b.cm,
            }
        )
    return pd.DataFrame(rows)
