"""
Extraction
==========
Fit multi-branch mBVD parameters to one-port admittance data.

The workflow is two calls::

    seed = initial_guess(measurement, n_branches=3)
    result = fit_mbvd(measurement, seed, FitOptions(restarts=8))

:func:`initial_guess` reads the branch resonances off the largest peaks of
``|Y|``, estimates the capacitance ratios from the neighbouring ``|Y|`` minima
and fits ``C0`` to the low-frequency susceptance. :func:`fit_mbvd` then refines
every element with a bounded simplex search on the log-magnitude and phase of
``Y``, restarting from perturbed seeds and keeping the best result.

Internally each branch is parametrised by ``(f_s, C_m, Q)`` instead of
``(L_m, C_m, R_m)``; the search runs on a unit box, with capacitances and ``Q``
mapped logarithmically and ``f_s`` linearly inside a narrow window around its
seed.
"""

from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np
import pandas as pd
from scipy.optimize import minimize
from scipy.signal import find_peaks

from .config import PyxbarConfigManager
from .errors import InsufficientPeaks, NonConvergence, PassivityViolation, PyxbarValidationError
from .logging import add_to_report_log, logger
from .netcore import FrequencyGrid
from .parallel import map_tasks
from .resonator import ModeFamily, ModeLabel, MbvdParams, MotionalBranch, admittance, series_resonance, summary

FS_WINDOW = 0.03
"""float : Relative half-width of the search window around each seeded f_s."""

Q_BOUNDS = (1.0, 1e5)
DEFAULT_RATIO = 0.05
PEAK_WEIGHT = 10.0
PEAK_REGION = 0.02
PASSIVITY_TOLERANCE = -1e-9
SIMPLEX_STEP = 0.01
RESTART_SPREAD = 0.02

FIT_NOTE = (
    "Fitted Rs and R0 are obtained solely through curve fitting and need not "
    "reflect the physical loss mechanisms of the device."
)


@dataclass(frozen=True, eq=False)
class MeasuredOnePort:
    grid: FrequencyGrid
    admittance: np.ndarray
    source: str = ""
    comments: Tuple[str, ...] = field(default_factory=tuple)

    def __post_init__(self):
        y = np.array(self.admittance, dtype=complex)
        if y.shape != (len(self.grid),):
            raise PyxbarValidationError(
                f"Admittance has shape {y.shape}, grid has {len(self.grid)} points"
            )
        if not np.all(np.isfinite(y)):
            raise PyxbarValidationError("Measured admittance contains non-finite values")
        y.setflags(write=False)
        object.__setattr__(self, "admittance", y)
        object.__setattr__(self, "comments", tuple(self.comments))

    @classmethod
    def from_s11(cls, grid, s11, z0=50.0, source="", comments=()):
        """One-port admittance from a reflection coefficient at real reference ``z0``"""
        s11 = np.asarray(s11, dtype=complex)
        return cls(grid, (1.0 - s11) / (1.0 + s11) / z0, source, comments)

    def s11(self, z0=50.0):
        y = self.admittance * z0
        return (1.0 - y) / (1.0 + y)


def synthesize_measurement(p: MbvdParams, grid: FrequencyGrid, noise=0.0, seed=0) -> MeasuredOnePort:
    """
    Admittance of ``p`` on ``grid``, optionally with multiplicative noise.

    The noise is complex Gaussian: each point is multiplied by ``1 + noise * (a + jb)``
    with independent standard normal ``a`` and ``b``.
    """
    y = admittance(p, grid.points)
    tag = "synthetic"
    if noise:
        rng = np.random.default_rng(seed)
        n = len(grid)
        y = y * (1.0 + noise * (rng.standard_normal(n) + 1j * rng.standard_normal(n)))
        tag = f"synthetic (noise={noise:g}, seed={seed})"
    return MeasuredOnePort(grid, y, tag)


# -----------------------------------------------------------------------------
# Seeding
# -----------------------------------------------------------------------------


def _susceptance_c0(f, y, fs, ratios):
    """Least-squares C0 from Im Y / w = C0 (1 + sum r_i / (1 - f^2 / fs_i^2))"""
    decade = f <= 10.0 * f[0]
    keep = decade.copy()
    for fs_i, r_i in zip(fs, ratios):
        fp_i = fs_i * np.sqrt(1.0 + r_i)
        keep &= np.abs(f / fs_i - 1.0) > 0.05
        keep &= np.abs(f / fp_i - 1.0) > 0.05
    if np.count_nonzero(keep) < 3:
        keep = decade
    f = f[keep]
    g = 1.0 + sum(r / (1.0 - f**2 / fs_i**2) for fs_i, r in zip(fs, ratios))
    h = y[keep].imag / (2 * np.pi * f)
    c0 = float(np.dot(g, h) / np.dot(g, g))
    if not c0 > 0:
        c0 = float(np.median(np.abs(h)))
    return c0


def initial_guess(m: MeasuredOnePort, n_branches: int) -> MbvdParams:
    """
    Seed parameters for :func:`fit_mbvd`.

    Raises
    ------
    InsufficientPeaks
        If ``|Y|`` has fewer than ``n_branches`` local maxima.
    """
    if n_branches < 1:
        raise PyxbarValidationError(f"Need at least one branch, got {n_branches}")
    f = m.grid.points
    mag = np.abs(m.admittance)
    peaks, props = find_peaks(np.log(mag), prominence=0)
    if peaks.size < n_branches:
        raise InsufficientPeaks(
            f"Found {peaks.size} admittance peaks in {m.source or 'the data'}, need {n_branches}"
        )
    strongest = np.sort(np.argsort(props["prominences"])[::-1][:n_branches])
    peaks = peaks[strongest]
    prominences = props["prominences"][strongest]
    fs = f[peaks]

    ratios = []
    for i, k in enumerate(peaks):
        stop = peaks[i + 1] if i + 1 < peaks.size else f.size
        j = k + int(np.argmin(mag[k:stop]))
        if k < j < f.size - 1:
            ratios.append(float((f[j] / f[k]) ** 2 - 1.0))
        else:
            logger.debug(f"No antiresonance found above {f[k]:.6g} Hz, assuming C_m/C_0 = {DEFAULT_RATIO}")
            ratios.append(DEFAULT_RATIO)

    c0 = _susceptance_c0(f, m.admittance, fs, ratios)
    main = int(np.argmax(prominences))
    branches = []
    spurious = 0
    for i, (k, fs_i, r_i) in enumerate(zip(peaks, fs, ratios)):
        cm = c0 * r_i
        lm = 1.0 / ((2 * np.pi * fs_i) ** 2 * cm)
        if i == main:
            mode = ModeLabel(ModeFamily.SYMMETRIC, 2)
        else:
            # spurious modes are labelled A1, A3, ... in frequency order
            mode = ModeLabel(ModeFamily.ANTISYMMETRIC, 2 * spurious + 1)
            spurious += 1
        branches.append(MotionalBranch(rm=1.0 / mag[k], lm=lm, cm=cm, mode=mode))
    logger.info(
        f"Seeded {n_branches} branch(es) at "
        + ", ".join(f"{x / 1e9:.4f} GHz" for x in fs)
        + f" with C0 = {c0 * 1e15:.2f} fF"
    )
    return MbvdParams(c0=c0, branches=tuple(branches))


# -----------------------------------------------------------------------------
# Fitting
# -----------------------------------------------------------------------------


@dataclass(frozen=True)
class FitOptions:
    max_iterations: int = 2000
    restarts: int = 8
    bounds_factor: Tuple[float, float] = (0.01, 100.0)
    peak_weighting: bool = False
    two_stage: bool = False
    seed: int = 0
    parallel: Optional[bool] = None
    strict: bool = False

    @classmethod
    def from_config(cls, config=None, **overrides):
        config = config or PyxbarConfigManager.from_pyxbar_cfg()
        values = dict(
            max_iterations=config("fit_max_iterations"),
            restarts=config("fit_restarts"),
            seed=config("random_seed"),
            parallel=config("parallel"),
        )
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)


@dataclass(frozen=True)
class FitResult:
    params: MbvdParams
    residual_rms: float
    fs_errors: Tuple[float, ...]
    converged: bool
    iterations: int
    restarts: int = 1
    note: str = FIT_NOTE

    def report(self, seed: Optional[MbvdParams] = None) -> pd.DataFrame:
        """Per-branch table: mode, f_s, f_p, k2, Q, element values and f_s shift"""
        df = summary(self.params)
        df["fs_rel_error"] = list(self.fs_errors)
        if seed is not None:
            df["fs_seed_Hz"] = [series_resonance(b) for b in seed.branches]
        return df


@dataclass(frozen=True)
class _Axis:
    name: str
    lower: float
    upper: float
    log: bool = False

    def to_value(self, x):
        if self.log:
            return float(np.exp(np.log(self.lower) + x * np.log(self.upper / self.lower)))
        return float(self.lower + x * (self.upper - self.lower))

    def to_unit(self, value):
        value = min(max(value, self.lower), self.upper)
        if self.log:
            return float(np.log(value / self.lower) / np.log(self.upper / self.lower))
        return float((value - self.lower) / (self.upper - self.lower))


def _q(b: MotionalBranch):
    return np.inf if b.rm == 0 else 1.0 / (2 * np.pi * b.fs * b.cm * b.rm)


def _axes(seed: MbvdParams, grid: FrequencyGrid, options: FitOptions):
    lo, hi = options.bounds_factor
    if not 0 < lo < 1 < hi:
        raise PyxbarValidationError(f"bounds_factor must satisfy 0 < lo < 1 < hi, got {options.bounds_factor}")
    max_rm = max(b.rm for b in seed.branches) or 1.0
    ls_max = 0.1 / ((2 * np.pi * grid.points[-1]) ** 2 * seed.c0)
    axes = [
        _Axis("c0", lo * seed.c0, hi * seed.c0, log=True),
        _Axis("r0", 0.0, max(2 * seed.r0, 10 * max_rm)),
        _Axis("rs", 0.0, max(2 * seed.rs, max_rm)),
        _Axis("ls", 0.0, max(2 * seed.ls, ls_max)),
    ]
    for i, b in enumerate(seed.branches):
        axes += [
            _Axis(f"fs_{i}", b.fs * (1 - FS_WINDOW), b.fs * (1 + FS_WINDOW)),
            _Axis(f"cm_{i}", lo * b.cm, hi * b.cm, log=True),
            _Axis(f"q_{i}", Q_BOUNDS[0], max(Q_BOUNDS[1], 2 * _q(b) if np.isfinite(_q(b)) else 0), log=True),
        ]
    return axes


def _seed_vector(seed: MbvdParams, axes):
    values = [seed.c0, seed.r0, seed.rs, seed.ls]
    for b in seed.branches:
        values += [b.fs, b.cm, min(_q(b), axes[len(values) + 2].upper)]
    return np.array([a.to_unit(v) for a, v in zip(axes, values)])


def _params_from_vector(x, axes, seed: MbvdParams) -> MbvdParams:
    v = [a.to_value(xi) for a, xi in zip(axes, np.clip(x, 0.0, 1.0))]
    branches = []
    for i, b in enumerate(seed.branches):
        fs, cm, q = v[4 + 3 * i:7 + 3 * i]
        lm = 1.0 / ((2 * np.pi * fs) ** 2 * cm)
        rm = 1.0 / (2 * np.pi * fs * cm * q)
        branches.append(MotionalBranch(rm=rm, lm=lm, cm=cm, mode=b.mode))
    return MbvdParams(
        c0=v[0], r0=v[1], rs=v[2], ls=v[3], branches=tuple(branches), geometry=seed.geometry
    )


def _weights(f, seed: MbvdParams, options: FitOptions):
    w = np.ones_like(f)
    if options.peak_weighting:
        for b in seed.branches:
            w[np.abs(f / b.fs - 1.0) <= PEAK_REGION] = PEAK_WEIGHT
    return w


def residuals(p: MbvdParams, m: MeasuredOnePort, weights=None) -> np.ndarray:
    """Stacked ``sqrt(w) * log|Ym/Yd|`` and ``arg(Ym/Yd)`` residuals"""
    ratio = admittance(p, m.grid.points) / m.admittance
    w = np.ones(ratio.size) if weights is None else weights
    return np.concatenate([np.sqrt(w) * np.log(np.abs(ratio)), np.angle(ratio)])


def _simplex_search(objective, x0, free, max_iterations):
    """
    Bounded Nelder-Mead over the ``free`` coordinates of the unit box.

    The run counts as converged only when scipy reports success, i.e. the
    simplex met both tolerances before ``max_iterations`` was used up.
    """
    full = np.array(x0, dtype=float)

    def reduced(z):
        x = full.copy()
        x[free] = z
        return objective(x)

    z0 = full[free]
    simplex = [z0]
    for k in range(z0.size):
        z = z0.copy()
        z[k] += SIMPLEX_STEP if z[k] + SIMPLEX_STEP <= 1.0 else -SIMPLEX_STEP
        simplex.append(z)
    res = minimize(
        reduced,
        z0,
        method="Nelder-Mead",
        bounds=[(0.0, 1.0)] * z0.size,
        options={
            "maxiter": max_iterations,
            "xatol": 1e-10,
            "fatol": 1e-14,
            "adaptive": z0.size > 4,
            "initial_simplex": np.array(simplex),
        },
    )
    x = full.copy()
    x[free] = res.x
    converged = bool(res.success) and res.nit < max_iterations
    return x, float(res.fun), int(res.nit), converged


def _fit_once(task):
    m, seed, options, x0 = task
    axes = _axes(seed, m.grid, options)
    weights = _weights(m.grid.points, seed, options)

    def objective(x):
        r = residuals(_params_from_vector(x, axes, seed), m, weights)
        return float(np.dot(r, r))

    all_free = np.arange(x0.size)
    iterations = 0
    if options.two_stage:
        x0, _, nit, _ = _simplex_search(objective, x0, np.delete(all_free, [1, 2, 3]), options.max_iterations)
        iterations += nit
    x, value, nit, converged = _simplex_search(objective, x0, all_free, options.max_iterations)
    return x, value, iterations + nit, converged


def _one_port_passivity_margin(p: MbvdParams, grid: FrequencyGrid, z0=50.0):
    y = admittance(p, grid.points) * z0
    s = (1.0 - y) / (1.0 + y)
    return float(np.min(1.0 - np.abs(s) ** 2))


@add_to_report_log
def fit_mbvd(m: MeasuredOnePort, init: MbvdParams, options: Optional[FitOptions] = None) -> FitResult:
    """
    Refine ``init`` against the measured admittance.

    Parameters
    ----------
    m : MeasuredOnePort
    init : MbvdParams
        Seed, usually from :func:`initial_guess`. Restart 0 starts here exactly.
    options : FitOptions

    Returns
    -------
    FitResult
        Best result over all restarts.

    Raises
    ------
    NonConvergence
        Only with ``options.strict``; otherwise the best-effort result is
        returned with ``converged=False``.
    PassivityViolation
        If the fitted model reflects more power than it receives anywhere on the grid.
    """
    options = options or FitOptions()
    if options.restarts < 1:
        raise PyxbarValidationError(f"Need at least one restart, got {options.restarts}")
    axes = _axes(init, m.grid, options)
    x_seed = _seed_vector(init, axes)
    rng_starts = [x_seed]
    for k in range(1, options.restarts):
        rng = np.random.default_rng(options.seed + k)
        rng_starts.append(np.clip(x_seed + rng.normal(0.0, RESTART_SPREAD, x_seed.size), 0.0, 1.0))

    logger.info(f"Fitting {init.n_branches}-branch mBVD model to {len(m.grid)} points ({options.restarts} restart(s))")
    outcomes = map_tasks(
        _fit_once,
        [(m, init, options, x0) for x0 in rng_starts],
        parallel=options.parallel,
        description="Fitting...",
    )
    best = int(np.argmin([value for _, value, _, _ in outcomes]))
    x, value, iterations, converged = outcomes[best]
    params = _params_from_vector(x, axes, init)
    n_residuals = 2 * len(m.grid)
    result = FitResult(
        params=params,
        residual_rms=float(np.sqrt(value / n_residuals)),
        fs_errors=tuple(
            (b.fs - s.fs) / s.fs for b, s in zip(params.branches, init.branches)
        ),
        converged=converged,
        iterations=iterations,
        restarts=options.restarts,
    )
    logger.info(f"Best restart {best}: residual rms {result.residual_rms:.3e} after {iterations} iterations")
    logger.info(FIT_NOTE)

    margin = _one_port_passivity_margin(params, m.grid)
    if margin < PASSIVITY_TOLERANCE:
        raise PassivityViolation(f"Fitted model is active (passivity margin {margin:.3e})")
    if not converged:
        if options.strict:
            raise NonConvergence("Fit did not converge within the iteration limit", result=result)
        logger.warning("Fit did not converge; returning the best parameters found")
    return result
