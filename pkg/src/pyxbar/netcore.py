"""
Netcore
=======
Frequency grids, two-port matrices and the algebra between them.

Everything is vectorized over frequency: a :class:`SweepResponse` stores an
``(n, 2, 2)`` complex array and every conversion operates on the whole stack at
once. Single matrices (:class:`TwoPortMatrix`) go through the same code paths as
stacks of length one.

Scattering parameters use power waves (Kurokawa) for complex reference
impedances ``g``::

    a = (V + g I) / (2 sqrt(Re g))
    b = (V - g* I) / (2 sqrt(Re g))

With real references this reduces to the usual pseudo-wave definition.

Examples
--------
A 50 ohm series element between 50 ohm ports:

>>> import numpy as np
>>> y = TwoPortMatrix("Y", [[0.02, -0.02], [-0.02, 0.02]])
>>> s = convert(y, "S", (50, 50))
>>> np.round(s.entries.real, 6)
array([[0.333333, 0.666667],
       [0.666667, 0.333333]])
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence, Tuple, Union

import numpy as np
import xarray as xr

from .errors import (
    KindMismatch,
    NonPositiveReference,
    PyxbarValidationError,
    SingularConversion,
)
from .logging import logger

SINGULAR_TOLERANCE = 1e-15
"""float : Relative determinant/pivot magnitude below which a matrix counts as singular."""

DEFAULT_REFERENCE = (50.0 + 0j, 50.0 + 0j)


class Kind(str, Enum):
    S = "S"
    Y = "Y"
    Z = "Z"
    ABCD = "ABCD"


def _as_kind(kind) -> Kind:
    try:
        return Kind(kind.value if isinstance(kind, Kind) else str(kind).upper())
    except ValueError:
        raise KindMismatch(f"Unknown two-port kind {kind!r}") from None


def as_ref_impedances(refs) -> np.ndarray:
    refs = np.asarray(
        DEFAULT_REFERENCE if refs is None else refs, dtype=complex
    ).reshape(-1)
    if refs.size == 1:
        refs = np.repeat(refs, 2)
    if refs.size != 2:
        raise NonPositiveReference(f"Expected two reference impedances, got {refs.size}")
    if not np.all(np.isfinite(refs)) or np.any(refs.real <= 0):
        raise NonPositiveReference(
            f"Reference impedances must have a positive real part, got {refs.tolist()}"
        )
    return refs


# -----------------------------------------------------------------------------
# Containers
# -----------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class FrequencyGrid:
    """Strictly increasing, positive sweep frequencies in Hz"""

    points: np.ndarray
    spacing: str = "linear"

    def __post_init__(self):
        points = np.array(self.points, dtype=float).reshape(-1)
        if points.size < 2:
            raise PyxbarValidationError("A frequency grid needs at least 2 points")
        if not np.all(np.isfinite(points)) or np.any(points <= 0):
            raise PyxbarValidationError("Grid frequencies must be finite and > 0")
        if np.any(np.diff(points) <= 0):
            raise PyxbarValidationError("Grid frequencies must be strictly increasing")
        if self.spacing not in ("linear", "logarithmic"):
            raise PyxbarValidationError(f"Unknown grid spacing {self.spacing!r}")
        points.setflags(write=False)
        object.__setattr__(self, "points", points)

    @classmethod
    def linear(cls, f_start, f_stop, n_points):
        return cls(np.linspace(f_start, f_stop, int(n_points)), "linear")

    @classmethod
    def logarithmic(cls, f_start, f_stop, n_points):
        return cls(
            np.geomspace(f_start, f_stop, int(n_points)), "logarithmic"
        )

    @classmethod
    def from_dict(cls, d):
        maker = cls.logarithmic if d.get("spacing") == "logarithmic" else cls.linear
        return maker(d["f_start_hz"], d["f_stop_hz"], d["n_points"])

    def to_dict(self):
        return {
            "f_start_hz": float(self.points[0]),
            "f_stop_hz": float(self.points[-1]),
            "n_points": len(self),
            "spacing": self.spacing,
        }

    @property
    def omega(self):
        return 2 * np.pi * self.points

    def scaled(self, factor):
        return FrequencyGrid(self.points * factor, self.spacing)

    def __len__(self):
        return self.points.size

    def __iter__(self):
        return iter(self.points)

    def __eq__(self, other):
        return (
            isinstance(other, FrequencyGrid)
            and self.points.shape == other.points.shape
            and bool(np.all(self.points == other.points))
        )


@dataclass(frozen=True, eq=False)
class TwoPortMatrix:
    kind: Kind
    entries: np.ndarray
    ref_impedances: Optional[Tuple[complex, complex]] = None

    def __post_init__(self):
        kind = _as_kind(self.kind)
        entries = np.array(self.entries, dtype=complex).reshape(2, 2)
        if not np.all(np.isfinite(entries)):
            raise PyxbarValidationError("Two-port entries must be finite")
        refs = None
        if kind is Kind.S:
            refs = tuple(as_ref_impedances(self.ref_impedances))
        entries.setflags(write=False)
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "entries", entries)
        object.__setattr__(self, "ref_impedances", refs)

    def __getitem__(self, ij):
        return self.entries[ij]


@dataclass(frozen=True, eq=False)
class SweepResponse:
    """One two-port matrix per grid point, stored as an ``(n, 2, 2)`` array"""

    grid: FrequencyGrid
    kind: Kind
    data: np.ndarray
    ref_impedances: Optional[Tuple[complex, complex]] = None
    comments: Tuple[str, ...] = field(default_factory=tuple)

    def __post_init__(self):
        kind = _as_kind(self.kind)
        data = np.array(self.data, dtype=complex)
        if data.shape != (len(self.grid), 2, 2):
            raise PyxbarValidationError(
                f"Sweep data shape {data.shape} does not match grid length {len(self.grid)}"
            )
        refs = tuple(as_ref_impedances(self.ref_impedances)) if kind is Kind.S else None
        data.setflags(write=False)
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "ref_impedances", refs)
        object.__setattr__(self, "comments", tuple(self.comments))

    @classmethod
    def from_matrices(cls, grid, matrices: Sequence[TwoPortMatrix]):
        kinds = {m.kind for m in matrices}
        if len(kinds) != 1:
            raise KindMismatch(f"Mixed kinds in sweep: {sorted(k.value for k in kinds)}")
        refs = {m.ref_impedances for m in matrices}
        if len(refs) != 1:
            raise NonPositiveReference("Reference impedances must be uniform across a sweep")
        return cls(grid, kinds.pop(), np.stack([m.entries for m in matrices]), refs.pop())

    def __len__(self):
        return len(self.grid)

    def __getitem__(self, index) -> TwoPortMatrix:
        return TwoPortMatrix(self.kind, self.data[index], self.ref_impedances)

    @property
    def matrices(self):
        return [self[i] for i in range(len(self))]

    @property
    def frequencies(self):
        return self.grid.points

    def param(self, i, j):
        """Entry ``(i, j)`` with 1-based port indices, across the sweep"""
        return self.data[:, i - 1, j - 1]

    def nearest_index(self, f):
        return int(np.argmin(np.abs(self.grid.points - f)))

    def at(self, f) -> TwoPortMatrix:
        return self[self.nearest_index(f)]

    def with_data(self, data, kind=None, ref_impedances=None):
        kind = self.kind if kind is None else kind
        return SweepResponse(self.grid, kind, data, ref_impedances, self.comments)

    def restricted(self, f_lo, f_hi):
        keep = (self.grid.points >= f_lo) & (self.grid.points <= f_hi)
        grid = FrequencyGrid(self.grid.points[keep], self.grid.spacing)
        return SweepResponse(grid, self.kind, self.data[keep], self.ref_impedances, self.comments)

    def to_xarray(self) -> xr.Dataset:
        coords = {"frequency": self.grid.points, "row": [1, 2], "col": [1, 2]}
        dims = ("frequency", "row", "col")
        ds = xr.Dataset(
            {
                "re": (dims, self.data.real),
                "im": (dims, self.data.imag),
            },
            coords=coords,
        )
        ds["frequency"].attrs["units"] = "Hz"
        ds.attrs["kind"] = self.kind.value
        if self.ref_impedances is not None:
            ds.attrs["ref_impedances"] = str([complex(z) for z in self.ref_impedances])
        return ds


# -----------------------------------------------------------------------------
# Batched helpers
# -----------------------------------------------------------------------------


def _det(m):
    return m[..., 0, 0] * m[..., 1, 1] - m[..., 0, 1] * m[..., 1, 0]


def _norm2(m):
    return np.sum(np.abs(m) ** 2, axis=(-2, -1))


def _check_invertible(m, what):
    det = _det(m)
    bad = np.abs(det) < SINGULAR_TOLERANCE * _norm2(m)
    if np.any(bad):
        raise SingularConversion(
            f"{what}: matrix is singular at sweep index {int(np.argmax(bad))}"
        )


def _inv(m, what):
    _check_invertible(m, what)
    return np.linalg.inv(m)


def _check_nonzero(x, scale, what):
    bad = np.abs(x) < SINGULAR_TOLERANCE * scale
    if np.any(bad):
        raise SingularConversion(f"{what} vanishes at sweep index {int(np.argmax(bad))}")


def _wave_matrices(refs, n):
    g = np.broadcast_to(refs, (n, 2))
    r = np.sqrt(g.real)
    eye = np.eye(2)
    F = eye * (1.0 / (2 * r))[:, :, None]
    Finv = eye * (2 * r)[:, :, None]
    G = eye * g[:, :, None]
    return F, Finv, G, np.conj(G)


def _y_to_s(y, refs):
    F, Finv, G, Gc = _wave_matrices(refs, y.shape[0])
    eye = np.eye(2)
    return F @ (eye - Gc @ y) @ _inv(eye + G @ y, "Y->S") @ Finv


def _z_to_s(z, refs):
    F, Finv, G, Gc = _wave_matrices(refs, z.shape[0])
    return F @ (z - Gc) @ _inv(z + G, "Z->S") @ Finv


def _s_to_z(s, refs):
    F, Finv, G, Gc = _wave_matrices(refs, s.shape[0])
    eye = np.eye(2)
    return Finv @ _inv(eye - s, "S->Z") @ (s @ G + Gc) @ F


def _s_to_y(s, refs):
    F, Finv, G, Gc = _wave_matrices(refs, s.shape[0])
    eye = np.eye(2)
    return Finv @ _inv(s @ G + Gc, "S->Y") @ (eye - s) @ F


def _y_to_abcd(y):
    y11, y12, y21, y22 = y[:, 0, 0], y[:, 0, 1], y[:, 1, 0], y[:, 1, 1]
    _check_nonzero(y21, np.sqrt(_norm2(y)), "Y21")
    out = np.empty_like(y)
    out[:, 0, 0] = -y22 / y21
    out[:, 0, 1] = -1 / y21
    out[:, 1, 0] = -_det(y) / y21
    out[:, 1, 1] = -y11 / y21
    return out


def _abcd_to_y(t):
    a, b, c, d = t[:, 0, 0], t[:, 0, 1], t[:, 1, 0], t[:, 1, 1]
    _check_nonzero(b, np.sqrt(_norm2(t)), "ABCD B entry")
    out = np.empty_like(t)
    out[:, 0, 0] = d / b
    out[:, 0, 1] = -_det(t) / b
    out[:, 1, 0] = -1 / b
    out[:, 1, 1] = a / b
    return out


def _z_to_abcd(z):
    z11, z21, z22 = z[:, 0, 0], z[:, 1, 0], z[:, 1, 1]
    _check_nonzero(z21, np.sqrt(_norm2(z)), "Z21")
    out = np.empty_like(z)
    out[:, 0, 0] = z11 / z21
    out[:, 0, 1] = _det(z) / z21
    out[:, 1, 0] = 1 / z21
    out[:, 1, 1] = z22 / z21
    return out


def _abcd_to_z(t):
    a, c, d = t[:, 0, 0], t[:, 1, 0], t[:, 1, 1]
    _check_nonzero(c, np.sqrt(_norm2(t)), "ABCD C entry")
    out = np.empty_like(t)
    out[:, 0, 0] = a / c
    out[:, 0, 1] = _det(t) / c
    out[:, 1, 0] = 1 / c
    out[:, 1, 1] = d / c
    return out


def _port_vectors(refs, n):
    g = np.broadcast_to(refs, (n, 2))
    r = np.sqrt(g.real)
    return g[:, 0], g[:, 1], r[:, 0], r[:, 1]


def _s_to_abcd(s, refs):
    n = s.shape[0]
    g1, g2, r1, r2 = _port_vectors(refs, n)
    s11, s12, s21, s22 = s[:, 0, 0], s[:, 0, 1], s[:, 1, 0], s[:, 1, 1]
    # (V1, I1) and (V2, -I2) as linear maps of the incident waves (a1, a2)
    m1 = np.empty((n, 2, 2), dtype=complex)
    m1[:, 0, 0] = (np.conj(g1) + g1 * s11) / r1
    m1[:, 0, 1] = g1 * s12 / r1
    m1[:, 1, 0] = (1 - s11) / r1
    m1[:, 1, 1] = -s12 / r1
    m2 = np.empty((n, 2, 2), dtype=complex)
    m2[:, 0, 0] = g2 * s21 / r2
    m2[:, 0, 1] = (np.conj(g2) + g2 * s22) / r2
    m2[:, 1, 0] = s21 / r2
    m2[:, 1, 1] = -(1 - s22) / r2
    return m1 @ _inv(m2, "S->ABCD")


def _abcd_to_s(t, refs):
    n = t.shape[0]
    g1, g2, r1, r2 = _port_vectors(refs, n)
    xa = np.stack([np.conj(g1) / r1, 1 / r1], axis=-1)
    xb = np.stack([g1 / r1, -1 / r1], axis=-1)
    ya = np.stack([np.conj(g2) / r2, -1 / r2], axis=-1)
    yb = np.stack([g2 / r2, 1 / r2], axis=-1)
    nb = np.stack([xb, -np.einsum("nij,nj->ni", t, yb)], axis=-1)
    na = np.stack([-xa, np.einsum("nij,nj->ni", t, ya)], axis=-1)
    return _inv(nb, "ABCD->S") @ na


def _convert_array(data, source, target, source_refs, target_refs):
    if source is target:
        return data
    if target is Kind.S:
        if source is Kind.Y:
            return _y_to_s(data, target_refs)
        if source is Kind.Z:
            return _z_to_s(data, target_refs)
        return _abcd_to_s(data, target_refs)
    if source is Kind.S:
        if target is Kind.Y:
            return _s_to_y(data, source_refs)
        if target is Kind.Z:
            return _s_to_z(data, source_refs)
        return _s_to_abcd(data, source_refs)
    # Y, Z and ABCD amongst each other
    if target is Kind.ABCD:
        return _y_to_abcd(data) if source is Kind.Y else _z_to_abcd(data)
    if source is Kind.ABCD:
        return _abcd_to_y(data) if target is Kind.Y else _abcd_to_z(data)
    return _inv(data, f"{source.value}->{target.value}")


# -----------------------------------------------------------------------------
# Public operations
# -----------------------------------------------------------------------------


def convert(
    m: Union[TwoPortMatrix, SweepResponse], target_kind, ref_impedances=None
) -> Union[TwoPortMatrix, SweepResponse]:
    """
    Convert a two-port (single matrix or whole sweep) to another representation.

    Parameters
    ----------
    m : TwoPortMatrix or SweepResponse
        The network to convert.
    target_kind : str or Kind
        One of ``S``, ``Y``, ``Z``, ``ABCD``.
    ref_impedances : pair of complex, optional
        Reference impedances of the result when converting *to* S from another
        kind. Defaults to 50 ohm at both ports. Ignored for other targets; use
        :func:`renormalize` to change the references of S data.

    Raises
    ------
    SingularConversion
        When the matrix that needs inverting has
        ``|det| < 1e-15 * ||M||_F**2`` (or a scalar pivot below
        ``1e-15 * ||M||_F``) at any frequency.
    """
    target = _as_kind(target_kind)
    single = isinstance(m, TwoPortMatrix)
    data = m.entries[None] if single else m.data
    source_refs = None if m.ref_impedances is None else np.asarray(m.ref_impedances)
    target_refs = None
    if target is Kind.S:
        target_refs = (
            np.asarray(m.ref_impedances)
            if m.kind is Kind.S
            else as_ref_impedances(ref_impedances)
        )
    out = _convert_array(data, m.kind, target, source_refs, target_refs)
    refs = None if target_refs is None else tuple(target_refs)
    if single:
        return TwoPortMatrix(target, out[0], refs)
    return m.with_data(out, kind=target, ref_impedances=refs)


def cascade(a, b):
    """
    Chain two ABCD networks, port 2 of ``a`` feeding port 1 of ``b``.

    Works on single matrices and on sweeps over the same grid.
    """
    for x in (a, b):
        if x.kind is not Kind.ABCD:
            raise KindMismatch(f"cascade needs ABCD matrices, got {x.kind.value}")
    if isinstance(a, TwoPortMatrix) and isinstance(b, TwoPortMatrix):
        return TwoPortMatrix(Kind.ABCD, a.entries @ b.entries)
    a_data = a.entries if isinstance(a, TwoPortMatrix) else a.data
    b_data = b.entries if isinstance(b, TwoPortMatrix) else b.data
    template = a if isinstance(a, SweepResponse) else b
    if isinstance(a, SweepResponse) and isinstance(b, SweepResponse) and a.grid != b.grid:
        raise PyxbarValidationError("Cannot cascade sweeps over different grids")
    return template.with_data(a_data @ b_data, kind=Kind.ABCD)


def renormalize(r: SweepResponse, new_refs) -> SweepResponse:
    """
    Re-express S-parameters with respect to new (complex) reference impedances.

    Per port, the new waves are a diagonal linear map of the old ones, so with
    ``b = S a``::

        S' = (R + T S) (P + Q S)^-1

    where, with ``g`` the old and ``g'`` the new reference and ``r = sqrt(Re g)``::

        P = (g* + g') / (2 r r')     Q = (g - g') / (2 r r')
        R = (g* - g'*) / (2 r r')    T = (g + g'*) / (2 r r')
    """
    if r.kind is not Kind.S:
        raise KindMismatch(f"renormalize needs S-parameters, got {r.kind.value}")
    g = np.asarray(r.ref_impedances, dtype=complex)
    gn = as_ref_impedances(new_refs)
    if np.array_equal(g, gn):
        return r
    rr = np.sqrt(g.real) * np.sqrt(gn.real)
    P = (np.conj(g) + gn) / (2 * rr)
    Q = (g - gn) / (2 * rr)
    R = (np.conj(g) - np.conj(gn)) / (2 * rr)
    T = (g + np.conj(gn)) / (2 * rr)
    s = r.data
    num = np.diag(R)[None] + T[None, :, None] * s
    den = np.diag(P)[None] + Q[None, :, None] * s
    out = num @ _inv(den, "renormalize")
    logger.debug(f"Renormalized sweep from {g.tolist()} to {gn.tolist()}")
    return r.with_data(out, ref_impedances=tuple(gn))


def passivity_margin(r: Union[SweepResponse, TwoPortMatrix]) -> float:
    """Worst-case smallest eigenvalue of ``I - S^H S`` (>= 0 means passive)"""
    if r.kind is not Kind.S:
        raise KindMismatch(f"passivity_margin needs S-parameters, got {r.kind.value}")
    s = r.entries[None] if isinstance(r, TwoPortMatrix) else r.data
    herm = np.eye(2)[None] - np.conj(np.swapaxes(s, -1, -2)) @ s
    return float(np.min(np.linalg.eigvalsh(herm)))


def unitarity_error(r: SweepResponse) -> float:
    """Largest ``||S^H S - I||_2`` over the sweep; zero for lossless networks"""
    s = r.data
    herm = np.conj(np.swapaxes(s, -1, -2)) @ s - np.eye(2)[None]
    return float(np.max(np.linalg.norm(herm, ord=2, axis=(-2, -1))))


def db20(x, sentinel_db=400.0):
    """``-20 log10 |x|`` with exact zeros (and overflow) mapped to ``sentinel_db``"""
    mag = np.abs(np.asarray(x))
    with np.errstate(divide="ignore"):
        out = -20.0 * np.log10(mag)
    return np.where(np.isfinite(out) & (out < sentinel_db), out, sentinel_db)


def return_loss_trace(r: SweepResponse, port: int = 1, sentinel_db=400.0):
    """Return loss ``-20 log10 |S_ii|`` in dB for ``port`` (1 or 2)"""
    if r.kind is not Kind.S:
        raise KindMismatch(f"return_loss_trace needs S-parameters, got {r.kind.value}")
    return db20(r.param(port, port), sentinel_db)
