"""
Metrics
=======
Filter figures of merit from a swept S-parameter response.

* insertion loss ``IL(f) = -20 log10 |S21(f)|`` (exact zeros map to a large
  sentinel, 400 dB by default)
* the 3-dB band is the contiguous run of grid points around the IL minimum
  with ``IL <= IL_min + 3 dB``; its edges are linearly interpolated between the
  last point inside and the first point outside
* centre frequency: arithmetic mean of the edges (geometric mean on request)
* fractional bandwidth ``(f_hi - f_lo) / f_c``
* out-of-band rejection: minimum IL over each caller-declared stopband
* ripple: highest interior IL peak inside the band above the IL minimum (0 dB
  for a single-humped passband)

Examples
--------
>>> import numpy as np
>>> float(np.round(insertion_loss_trace_values([0.5]), 4)[0])
6.0206
"""

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from .errors import BandTouchesSweepEdge, KindMismatch, NoPassband, PyxbarValidationError
from .logging import logger
from .netcore import Kind, SweepResponse, db20

IL_FLOOR_DB = 40.0
IL_SENTINEL_DB = 400.0
BAND_DB = 3.0

CSV_COLUMNS = ["f_c_Hz", "il_min_dB", "fbw_pct", "f_lo_Hz", "f_hi_Hz", "oob_dB", "ripple_dB"]


@dataclass(frozen=True)
class FilterMetrics:
    f_lo: float
    f_hi: float
    f_c: float
    il_min_db: float
    fbw_3db: float
    oob_rejection_db: Tuple[float, ...] = field(default_factory=tuple)
    ripple_db: float = 0.0
    f_il_min: Optional[float] = None
    stopbands: Tuple[Tuple[float, float], ...] = field(default_factory=tuple)

    @property
    def oob_db(self) -> float:
        """Worst rejection over all declared stopbands (NaN without stopbands)"""
        return min(self.oob_rejection_db) if self.oob_rejection_db else float("nan")

    def to_row(self) -> dict:
        return {
            "f_c_Hz": self.f_c,
            "il_min_dB": self.il_min_db,
            "fbw_pct": 100.0 * self.fbw_3db,
            "f_lo_Hz": self.f_lo,
            "f_hi_Hz": self.f_hi,
            "oob_dB": self.oob_db,
            "ripple_dB": self.ripple_db,
        }


def insertion_loss_trace_values(s21, sentinel_db=IL_SENTINEL_DB):
    return db20(s21, sentinel_db)


def insertion_loss_trace(r: SweepResponse, sentinel_db=IL_SENTINEL_DB) -> np.ndarray:
    """Per-frequency insertion loss in dB"""
    if r.kind is not Kind.S:
        raise KindMismatch(f"Insertion loss needs S-parameters, got {r.kind.value}")
    return insertion_loss_trace_values(r.param(2, 1), sentinel_db)


def _crossing(f, il, inside, outside, threshold):
    """Frequency where IL crosses ``threshold`` between two neighbouring points"""
    f0, f1 = f[inside], f[outside]
    l0, l1 = il[inside], il[outside]
    return f0 + (threshold - l0) * (f1 - f0) / (l1 - l0)


def band_edges(f, il, threshold, anchor):
    """Contiguous band around index ``anchor`` where ``il <= threshold``"""
    below = il <= threshold
    lo = anchor
    while lo > 0 and below[lo - 1]:
        lo -= 1
    hi = anchor
    while hi < il.size - 1 and below[hi + 1]:
        hi += 1
    if lo == 0 or hi == il.size - 1:
        side = "lower" if lo == 0 else "upper"
        raise BandTouchesSweepEdge(
            f"The {side} 3-dB edge is not inside the sweep "
            f"[{f[0]:.6g}, {f[-1]:.6g}] Hz; widen the sweep"
        )
    return _crossing(f, il, lo, lo - 1, threshold), _crossing(f, il, hi, hi + 1, threshold), lo, hi


def _stopband_rejection(f, il, lo, hi):
    if lo >= hi:
        raise PyxbarValidationError(f"Stopband [{lo}, {hi}] is empty")
    if hi < f[0] or lo > f[-1]:
        raise PyxbarValidationError(
            f"Stopband [{lo:.6g}, {hi:.6g}] Hz lies outside the sweep"
        )
    inside = il[(f >= lo) & (f <= hi)]
    edges = np.interp([max(lo, f[0]), min(hi, f[-1])], f, il)
    return float(np.min(np.concatenate([inside, edges])))


def _ripple(il, lo, hi, il_min):
    """
    Passband ripple in dB: the highest interior local maximum of IL inside the
    3-dB band minus ``il_min``, or 0 when the band has no interior maximum.

    The plain max minus min over the band samples is not used because the
    samples next to the band edges sit just under ``il_min + 3`` and would
    swamp any real ripple.
    """
    band = il[lo:hi + 1]
    if band.size < 3:
        return 0.0
    peaks = (band[1:-1] > band[:-2]) & (band[1:-1] >= band[2:])
    if not np.any(peaks):
        return 0.0
    return float(np.max(band[1:-1][peaks]) - il_min)


def extract_metrics(
    r: SweepResponse,
    stopbands: Iterable[Sequence[float]] = (),
    il_floor_db: float = IL_FLOOR_DB,
    center: str = "arithmetic",
    sentinel_db: float = IL_SENTINEL_DB,
) -> FilterMetrics:
    """
    Figures of merit of a swept response.

    Parameters
    ----------
    r : SweepResponse
        S-parameter sweep.
    stopbands : iterable of (lo, hi)
        Frequency intervals in Hz over which the rejection is reported.
    il_floor_db : float
        The response needs at least one point below this IL to have a passband.
    center : {"arithmetic", "geometric"}
        How ``f_c`` is formed from the band edges.

    Raises
    ------
    NoPassband
        If the IL minimum is not below ``il_floor_db``.
    BandTouchesSweepEdge
        If the 3-dB band runs into either end of the sweep.
    """
    if center not in ("arithmetic", "geometric"):
        raise PyxbarValidationError(f"Unknown centre convention {center!r}")
    f = r.grid.points
    il = insertion_loss_trace(r, sentinel_db)
    anchor = int(np.argmin(il))
    il_min = float(il[anchor])
    if not il_min < il_floor_db:
        raise NoPassband(
            f"Minimum insertion loss {il_min:.2f} dB is not below the {il_floor_db:.1f} dB floor"
        )
    f_lo, f_hi, lo, hi = band_edges(f, il, il_min + BAND_DB, anchor)
    f_c = (f_lo + f_hi) / 2 if center == "arithmetic" else float(np.sqrt(f_lo * f_hi))
    stopbands = tuple((float(a), float(b)) for a, b in stopbands)
    oob = tuple(_stopband_rejection(f, il, a, b) for a, b in stopbands)
    metrics = FilterMetrics(
        f_lo=float(f_lo),
        f_hi=float(f_hi),
        f_c=float(f_c),
        il_min_db=il_min,
        fbw_3db=float((f_hi - f_lo) / f_c),
        oob_rejection_db=oob,
        ripple_db=_ripple(il, lo, hi, il_min),
        f_il_min=float(f[anchor]),
        stopbands=stopbands,
    )
    logger.debug(
        f"f_c = {metrics.f_c / 1e9:.4f} GHz, IL_min = {il_min:.3f} dB, "
        f"FBW = {100 * metrics.fbw_3db:.2f} %"
    )
    return metrics


def metrics_to_frame(metrics: Mapping[str, FilterMetrics], extra: Optional[Mapping] = None) -> pd.DataFrame:
    """One row per named response, in the CSV column order"""
    rows = []
    for name, m in metrics.items():
        row = {"name": name, **m.to_row()}
        for i, value in enumerate(m.oob_rejection_db):
            row[f"oob{i + 1}_dB"] = value
        if extra and name in extra:
            row.update(extra[name])
        rows.append(row)
    df = pd.DataFrame(rows)
    ordered = ["name"] + CSV_COLUMNS
    return df[ordered + [c for c in df.columns if c not in ordered]]
