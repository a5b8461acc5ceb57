"""
Design
======
End-to-end evaluation of filter designs and a multi-start simplex optimizer on
top of it.

:func:`evaluate` runs the whole chain for one design: netlist, nodal sweep,
optional simultaneous conjugate match and metric extraction.

:func:`optimize` tunes a template design against a :class:`TargetSpec`. Every
:class:`FreeParameter` is a multiplier on some element of one resonator (or an
admittance scale or frequency shift of the whole resonator), searched inside
``[lower, upper]``. The cost is a weighted sum of squared, normalized hinge
violations::

    cost = w_il  * max(0, (IL_min - IL_max) / IL_max) ** 2
         + w_fbw * max(0, (FBW_min - FBW) / FBW_min) ** 2
         + w_oob * sum_k max(0, (OOB_min - OOB_k) / OOB_min) ** 2
         + w_fc  * max(0, |f_c - f_target| / f_target - tol) ** 2

Designs whose evaluation fails numerically (no passband, band touching the
sweep edge, infeasible match, ...) get :data:`FAILURE_COST`.
"""

import dataclasses
from dataclasses import dataclass, field
from typing import Dict, Mapping, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from scipy.optimize import minimize

from .errors import InfeasibleBounds, NoPassband, PyxbarNumericError, PyxbarValidationError
from .logging import add_to_report_log, logger
from .matching import MatchSolution, apply_match, match_sweep
from .metrics import IL_FLOOR_DB, FilterMetrics, extract_metrics, metrics_to_frame
from .mna import sweep_reduce
from .netcore import FrequencyGrid, SweepResponse, renormalize
from .parallel import map_tasks
from .resonator import MbvdParams, scale
from .topology import FilterDesign

FAILURE_COST = 1e3
SIMPLEX_STEP = 0.1
KINDS = ("scale", "f_shift", "c0", "r0", "rs", "ls", "cm", "lm", "rm")

MatchMode = Union[str, Sequence[complex], None]


class Evaluation(NamedTuple):
    response: SweepResponse
    metrics: FilterMetrics
    match: Optional[MatchSolution]


def evaluate(
    design: FilterDesign,
    grid: FrequencyGrid,
    match: MatchMode = "auto",
    stopbands: Sequence[Sequence[float]] = (),
    il_floor_db: float = IL_FLOOR_DB,
    center: str = "arithmetic",
    f_design: Optional[float] = None,
) -> Evaluation:
    """
    Simulate ``design`` on ``grid`` and extract its metrics.

    Parameters
    ----------
    match : "auto", "none" or a pair of impedances
        ``"auto"`` solves the simultaneous conjugate match at ``f_design``
        (default: the point of largest ``|S21|``) and renormalizes the sweep to
        it. A pair of impedances renormalizes to those fixed references.
    """
    netlist = design.build_netlist()
    response = sweep_reduce(netlist, grid, to_s=True, ref_impedances=design.ref_impedances)
    solution = None
    if isinstance(match, str) and match == "auto":
        peak = float(np.max(np.abs(response.param(2, 1))))
        if peak < 10 ** (-il_floor_db / 20):
            raise NoPassband(
                f"|S21| never exceeds {peak:.3e}; nothing to match in design {design.name!r}"
            )
        solution = match_sweep(response, f_design)
        response = apply_match(response, solution)
    elif match is not None and not (isinstance(match, str) and match == "none"):
        if isinstance(match, str):
            raise PyxbarValidationError(f"match must be 'auto', 'none' or two impedances, got {match!r}")
        response = renormalize(response, match)
    metrics = extract_metrics(response, stopbands, il_floor_db, center)
    return Evaluation(response, metrics, solution)


# -----------------------------------------------------------------------------
# Targets and cost
# -----------------------------------------------------------------------------


@dataclass(frozen=True)
class TargetSpec:
    f_c_target: float
    fbw_min: float
    il_max_db: float
    oob_min_db: float = 0.0
    stopbands: Tuple[Tuple[float, float], ...] = field(default_factory=tuple)
    weights: Mapping[str, float] = field(default_factory=lambda: {"il": 1.0, "fbw": 1.0, "oob": 1.0, "f_c": 1.0})
    f_c_tolerance: float = 0.0

    def __post_init__(self):
        if not 0 < self.fbw_min < 1:
            raise PyxbarValidationError(f"fbw_min must lie in (0, 1), got {self.fbw_min}")
        if not self.il_max_db > 0:
            raise PyxbarValidationError(f"il_max_db must be > 0, got {self.il_max_db}")
        if not self.f_c_target > 0:
            raise PyxbarValidationError(f"f_c_target must be > 0, got {self.f_c_target}")
        if self.oob_min_db < 0 or self.f_c_tolerance < 0:
            raise PyxbarValidationError("oob_min_db and f_c_tolerance must be >= 0")
        weights = {"il": 1.0, "fbw": 1.0, "oob": 1.0, "f_c": 1.0}
        unknown = set(self.weights) - set(weights)
        if unknown:
            raise PyxbarValidationError(f"Unknown cost weights: {sorted(unknown)}")
        weights.update({k: float(v) for k, v in self.weights.items()})
        if any(w < 0 for w in weights.values()):
            raise PyxbarValidationError(f"Weights must be >= 0, got {weights}")
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "stopbands", tuple((float(a), float(b)) for a, b in self.stopbands))


def cost_terms(metrics: FilterMetrics, spec: TargetSpec) -> Dict[str, float]:
    """Unweighted squared hinge violations, one entry per cost term"""
    def hinge(x):
        return max(0.0, x) ** 2

    oob = 0.0
    if spec.oob_min_db > 0:
        oob = sum(hinge((spec.oob_min_db - r) / spec.oob_min_db) for r in metrics.oob_rejection_db)
    return {
        "il": hinge((metrics.il_min_db - spec.il_max_db) / spec.il_max_db),
        "fbw": hinge((spec.fbw_min - metrics.fbw_3db) / spec.fbw_min),
        "oob": oob,
        "f_c": hinge(abs(metrics.f_c - spec.f_c_target) / spec.f_c_target - spec.f_c_tolerance),
    }


def cost(metrics: FilterMetrics, spec: TargetSpec) -> float:
    terms = cost_terms(metrics, spec)
    return float(sum(spec.weights[k] * v for k, v in terms.items()))


# -----------------------------------------------------------------------------
# Free parameters
# -----------------------------------------------------------------------------


@dataclass(frozen=True)
class FreeParameter:
    """
    A multiplier on one resonator, searched in ``[lower, upper]``.

    ``kind`` is one of ``scale`` (admittance scale), ``f_shift`` (all motional
    resonances move by the factor), ``c0``, ``r0``, ``rs``, ``ls`` or ``cm``,
    ``lm``, ``rm`` (applied to every motional branch, spurs included).
    """

    resonator: str
    kind: str
    lower: float
    upper: float

    def __post_init__(self):
        if self.kind not in KINDS:
            raise PyxbarValidationError(f"Unknown free-parameter kind {self.kind!r}; expected one of {KINDS}")
        lo, hi = self.lower, self.upper
        if not (np.isfinite(lo) and np.isfinite(hi)) or not 0 < lo < hi:
            raise InfeasibleBounds(
                f"Bounds for {self.resonator}.{self.kind} must satisfy 0 < lower < upper, got [{lo}, {hi}]"
            )

    @property
    def label(self):
        return f"{self.resonator}.{self.kind}"

    def to_dict(self):
        return dataclasses.asdict(self)


def _apply(p: MbvdParams, kind: str, v: float) -> MbvdParams:
    if kind == "scale":
        return scale(p, v)
    if kind == "f_shift":
        branches = tuple(dataclasses.replace(b, lm=b.lm / v**2) for b in p.branches)
        return dataclasses.replace(p, branches=branches)
    if kind in ("c0", "r0", "rs", "ls"):
        return dataclasses.replace(p, **{kind: getattr(p, kind) * v})
    branches = tuple(dataclasses.replace(b, **{kind: getattr(b, kind) * v}) for b in p.branches)
    return dataclasses.replace(p, branches=branches)


def apply_parameters(template: FilterDesign, free: Sequence[FreeParameter], values) -> FilterDesign:
    design = template
    for fp, v in zip(free, values):
        design = design.map_resonator(fp.resonator, lambda p, fp=fp, v=v: _apply(p, fp.kind, float(v)))
    return design


# -----------------------------------------------------------------------------
# Optimizer
# -----------------------------------------------------------------------------


@dataclass(frozen=True)
class OptimizationResult:
    design: FilterDesign
    cost: float
    metrics: Optional[FilterMetrics]
    history: pd.DataFrame
    values: Tuple[float, ...]
    budget_exhausted: bool = False

    @property
    def evaluations(self):
        return len(self.history)


class _Solved(Exception):
    """Stops a simplex run once the cost reaches zero"""


@dataclass(frozen=True)
class _Problem:
    template: FilterDesign
    spec: TargetSpec
    free: Tuple[FreeParameter, ...]
    grid: FrequencyGrid
    match: MatchMode
    il_floor_db: float
    center: str

    def values(self, x):
        lo = np.array([fp.lower for fp in self.free])
        hi = np.array([fp.upper for fp in self.free])
        return lo + np.clip(x, 0.0, 1.0) * (hi - lo)

    def unit(self, values):
        lo = np.array([fp.lower for fp in self.free])
        hi = np.array([fp.upper for fp in self.free])
        return np.clip((np.asarray(values, dtype=float) - lo) / (hi - lo), 0.0, 1.0)

    def cost(self, x):
        try:
            design = apply_parameters(self.template, self.free, self.values(x))
            ev = evaluate(design, self.grid, self.match, self.spec.stopbands, self.il_floor_db, self.center)
        except (PyxbarNumericError, PyxbarValidationError) as e:
            logger.debug(f"Evaluation failed ({type(e).__name__}: {e})")
            return FAILURE_COST
        return cost(ev.metrics, self.spec)


def _run_start(task):
    problem, start, x0, budget = task
    rows = []

    def objective(z):
        value = problem.cost(z)
        rows.append((start, value, *problem.values(z)))
        if value == 0.0:
            raise _Solved()
        return value

    n = x0.size
    simplex = [x0]
    for k in range(n):
        z = x0.copy()
        z[k] += SIMPLEX_STEP if z[k] + SIMPLEX_STEP <= 1.0 else -SIMPLEX_STEP
        simplex.append(z)
    exhausted = False
    try:
        res = minimize(
            objective,
            x0,
            method="Nelder-Mead",
            bounds=[(0.0, 1.0)] * n,
            options={
                "maxfev": budget,
                "xatol": 1e-8,
                "fatol": 1e-12,
                "initial_simplex": np.array(simplex),
            },
        )
        exhausted = res.status == 1
    except _Solved:
        pass
    return rows[:budget], exhausted


def _check_free_parameters(template: FilterDesign, free: Sequence[FreeParameter]):
    if not free:
        raise PyxbarValidationError("Nothing to optimize: no free parameters given")
    for fp in free:
        if fp.resonator not in template.resonators:
            raise PyxbarValidationError(f"Free parameter refers to unknown resonator {fp.resonator!r}")
    labels = [fp.label for fp in free]
    if len(set(labels)) != len(labels):
        raise PyxbarValidationError(f"Duplicate free parameters: {labels}")


@add_to_report_log
def optimize(
    template: FilterDesign,
    spec: TargetSpec,
    free: Sequence[FreeParameter],
    grid: FrequencyGrid,
    budget: int = 5000,
    starts: int = 8,
    seed: int = 0,
    match: MatchMode = "auto",
    il_floor_db: float = IL_FLOOR_DB,
    center: str = "arithmetic",
    parallel: Optional[bool] = None,
) -> OptimizationResult:
    """
    Multi-start bounded simplex search for the cheapest design.

    Start 0 begins at the template itself (every multiplier 1, clipped into
    the bounds); the others at uniform random points of the box drawn from a
    generator seeded with ``seed``. The budget is split evenly across starts.

    Returns
    -------
    OptimizationResult
        The best design found and the full evaluation history. When the
        budget ran out before the search converged and the cost is still
        positive, ``budget_exhausted`` is set.
    """
    free = tuple(free)
    _check_free_parameters(template, free)
    if budget < 1 or starts < 1:
        raise PyxbarValidationError(f"budget and starts must be >= 1, got {budget}, {starts}")
    problem = _Problem(template, spec, free, grid, match, il_floor_db, center)
    columns = ["evaluation", "start", "cost", "best_cost"] + [fp.label for fp in free]

    x_template = problem.unit(np.ones(len(free)))
    template_cost = problem.cost(x_template)
    if template_cost == 0.0:
        logger.info("Template already meets the target")
        history = pd.DataFrame([[0, 0, 0.0, 0.0, *problem.values(x_template)]], columns=columns)
        return OptimizationResult(
            design=apply_parameters(template, free, problem.values(x_template)),
            cost=0.0,
            metrics=_metrics_or_none(problem, x_template),
            history=history,
            values=tuple(float(v) for v in problem.values(x_template)),
        )

    rng = np.random.default_rng(seed)
    x_starts = [x_template] + [rng.uniform(0.0, 1.0, len(free)) for _ in range(1, starts)]
    shares = [budget // starts + (1 if k < budget % starts else 0) for k in range(starts)]
    tasks = [(problem, k, x0, share) for k, (x0, share) in enumerate(zip(x_starts, shares)) if share > 0]
    logger.info(f"Optimizing {len(free)} parameter(s) with {len(tasks)} start(s), budget {budget}")
    outcomes = map_tasks(_run_start, tasks, parallel=parallel, description="Optimizing...")

    rows = [row for start_rows, _ in outcomes for row in start_rows]
    history = pd.DataFrame(
        [(i, start, value, 0.0, *vals) for i, (start, value, *vals) in enumerate(rows)],
        columns=columns,
    )
    history["best_cost"] = history["cost"].cummin()
    best = int(history["cost"].idxmin())
    values = tuple(float(history.loc[best, fp.label]) for fp in free)
    best_cost = float(history.loc[best, "cost"])
    exhausted = best_cost > 0 and any(flag for _, flag in outcomes)
    if exhausted:
        logger.warning(f"Evaluation budget of {budget} exhausted; best cost {best_cost:.3e}")
    logger.info(f"Best cost {best_cost:.3e} at " + ", ".join(f"{fp.label}={v:.6g}" for fp, v in zip(free, values)))
    return OptimizationResult(
        design=apply_parameters(template, free, values),
        cost=best_cost,
        metrics=_metrics_or_none(problem, problem.unit(values)),
        history=history,
        values=values,
        budget_exhausted=exhausted,
    )


def _metrics_or_none(problem: _Problem, x):
    try:
        design = apply_parameters(problem.template, problem.free, problem.values(x))
        return evaluate(
            design, problem.grid, problem.match, problem.spec.stopbands, problem.il_floor_db, problem.center
        ).metrics
    except PyxbarNumericError:
        return None


# -----------------------------------------------------------------------------
# Comparison
# -----------------------------------------------------------------------------


def compare(
    designs: Mapping[str, FilterDesign],
    grid: Union[FrequencyGrid, Mapping[str, FrequencyGrid]],
    spec: Optional[TargetSpec] = None,
    match: Union[MatchMode, Mapping[str, MatchMode]] = "auto",
    stopbands: Union[Sequence[Sequence[float]], Mapping[str, Sequence[Sequence[float]]]] = (),
    il_floor_db: float = IL_FLOOR_DB,
    center: str = "arithmetic",
    free: Sequence[FreeParameter] = (),
    budget: int = 5000,
    starts: int = 8,
    seed: int = 0,
    parallel: Optional[bool] = None,
) -> pd.DataFrame:
    """
    Tabulate several designs side by side.

    One row per design with the metric columns, resonator count and footprint,
    plus the cost against ``spec`` when one is given. ``grid``, ``match`` and
    ``stopbands`` may be given per design as mappings keyed by design name.

    With a ``spec`` and ``free`` parameters every design is first tuned with
    :func:`optimize` (same spec, parameters, budget and seed for each), and the
    row describes the optimized design. The chosen multipliers and the number
    of evaluations spent are added as columns.
    """
    free = tuple(free)
    if free and spec is None:
        raise PyxbarValidationError("Free parameters need a target spec to optimize against")
    if spec is not None and not stopbands:
        stopbands = spec.stopbands
    metrics, extra = {}, {}
    for name, design in designs.items():
        g = grid[name] if isinstance(grid, Mapping) else grid
        m = match[name] if isinstance(match, Mapping) else match
        bands = stopbands[name] if isinstance(stopbands, Mapping) else stopbands
        row = {}
        if free:
            logger.info(f"Optimizing {name!r} before comparison")
            result = optimize(
                design, spec, free, g, budget, starts, seed, m, il_floor_db, center, parallel=parallel
            )
            design = result.design
            row["evaluations"] = result.evaluations
            row.update(zip((fp.label for fp in free), result.values))
        ev = evaluate(design, g, m, bands, il_floor_db, center)
        metrics[name] = ev.metrics
        extra[name] = {
            "topology": design.topology.value,
            "resonators": design.resonator_count,
            "footprint_m2": design.footprint(),
            **row,
        }
        if spec is not None:
            extra[name]["cost"] = cost(ev.metrics, spec)
    return metrics_to_frame(metrics, extra)
