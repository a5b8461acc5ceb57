import os
import shutil
import sys
from functools import wraps

import rich_click as click
from click_loguru import ClickLoguru
from rich.traceback import install as rich_traceback_install

from . import _version
from .config import PyxbarConfigManager
from .data import DEMO_FILES, data_path
from .design import compare as compare_designs
from .design import evaluate
from .design import optimize as optimize_design
from .designfile import dump_design, dump_resonator, load_design, load_resonator, load_spec
from .errors import BudgetExhausted, PyxbarError, PyxbarValidationError
from .extraction import FitOptions, MeasuredOnePort, fit_mbvd, initial_guess, synthesize_measurement
from .files import export_plot_data, write_csv, write_json
from .logging import add_report_logger, logger
from .matching import apply_match, match_sweep
from .metrics import extract_metrics, metrics_to_frame
from .mna import sweep_reduce
from .netcore import FrequencyGrid, SweepResponse
from .touchstone import read_touchstone, write_touchstone

MAX_FRAMES = int(os.environ.get("PYXBAR_ERROR_MAX_FRAMES", 3))
"""
int: The maximum number of frames to show in the traceback if there is an error. Default to 3
"""
rich_traceback_install(show_locals=True, max_frames=MAX_FRAMES)

VERSION = _version.get_versions()["version"]

LOG_FILE_RETENTION = 3
NAME = "pyxbar"
click_loguru = ClickLoguru(
    NAME,
    VERSION,
    retention=LOG_FILE_RETENTION,
    timer_log_level="info",
)


def exit_codes(func):
    """
    Maps pyxbar errors onto exit codes: 2 for validation errors, 3 for numeric failures
    """

    @wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except PyxbarError as e:
            logger.error(f"{type(e).__name__}: {e}")
            sys.exit(e.exit_code)

    return wrapper


def _stopband(value):
    try:
        lo, hi = (float(v) for v in value.split(":"))
    except ValueError:
        raise click.BadParameter(f"expected LO:HI in Hz, got {value!r}")
    if not 0 < lo < hi:
        raise click.BadParameter(f"stopband must satisfy 0 < LO < HI, got {value!r}")
    return lo, hi


def _read_sweep(path) -> SweepResponse:
    data = read_touchstone(path)
    if isinstance(data, MeasuredOnePort):
        raise PyxbarValidationError(f"{path} is a one-port file; this command needs a .s2p sweep")
    return data


def _write_sweep(response, path, config, sidecar=False):
    return write_touchstone(
        response,
        path,
        fmt=config("touchstone_format"),
        unit=config("touchstone_frequency_unit"),
        sidecar=sidecar,
    )


@click_loguru.logging_options
@click.group(name="pyxbar", help="pyxbar - Makes lattice XBAR filters simple")
@click_loguru.stash_subcommand()
@click.version_option(version=VERSION, prog_name=NAME)
def cli(verbose, quiet, logfile, profile_mem):
    return 0


################################################################################
# Direct Commands
################################################################################


@cli.command()
@click_loguru.init_logger()
@click.argument("design_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "out", type=click.Path(dir_okay=False), required=True, help="Output .s2p file")
@click.option("--metrics", "metrics_file", type=click.Path(dir_okay=False), help="Write filter metrics as CSV")
@click.option("--plot-data", type=click.Path(dir_okay=False), help="Write the sweep as tidy CSV")
@click.option("--matched/--unmatched", default=False, help="Write the matched sweep instead of the raw one")
@click.option("--sidecar", is_flag=True, help="Allow complex references via a .refs.json sidecar")
@exit_codes
def simulate(design_file, out, metrics_file, plot_data, matched, sidecar):
    """Sweep a design file and write its S-parameters"""
    # NOTE: ``init_logger`` removes every configured sink, so the report log is re-attached here.
    add_report_logger()
    config = PyxbarConfigManager.from_pyxbar_cfg()
    doc = load_design(design_file)
    design = doc.design
    ev = evaluate(
        design,
        doc.grid,
        doc.match,
        doc.stopbands,
        config("il_floor_db"),
        config("center_convention"),
    )
    if matched:
        response = ev.response
    else:
        response = sweep_reduce(design.build_netlist(), doc.grid, to_s=True, ref_impedances=design.ref_impedances)
    _write_sweep(response, out, config, sidecar=sidecar)
    m = ev.metrics
    logger.info(
        f"{design.name or design_file}: f_c {m.f_c / 1e9:.4f} GHz, IL {m.il_min_db:.3f} dB, FBW {100 * m.fbw_3db:.2f} %"
    )
    if metrics_file:
        write_csv(metrics_file, metrics_to_frame({design.name or str(design_file): m}))
    if plot_data:
        export_plot_data(plot_data, response)
    logger.success(f"Wrote {out}")


@cli.command()
@click_loguru.init_logger()
@click.argument("sweep_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--at-hz", type=float, default=None, help="Design frequency (default: largest |S21|)")
@click.option("--out", "out", type=click.Path(dir_okay=False), required=True, help="Matched .s2p file")
@click.option("--report", type=click.Path(dir_okay=False), help="Write the match solution as JSON")
@click.option(
    "--sidecar/--no-sidecar",
    default=True,
    help="Write complex match references to a .refs.json sidecar",
)
@exit_codes
def match(sweep_file, at_hz, out, report, sidecar):
    """Simultaneous conjugate match of a two-port sweep"""
    add_report_logger()
    config = PyxbarConfigManager.from_pyxbar_cfg()
    response = _read_sweep(sweep_file)
    solution = match_sweep(response, at_hz)
    matched = apply_match(response, solution)
    _write_sweep(matched, out, config, sidecar=sidecar)
    if report:
        write_json(report, solution.to_dict())
    logger.success(f"Matched at {solution.f_design / 1e9:.6g} GHz, K = {solution.rollett_k:.6g}")


@cli.command()
@click_loguru.init_logger()
@click.argument("sweep_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--stopband", "stopbands", multiple=True, help="Stopband LO:HI in Hz (repeatable)")
@click.option("--out", "out", type=click.Path(dir_okay=False), required=True, help="Output CSV")
@exit_codes
def metrics(sweep_file, stopbands, out):
    """Passband and stopband metrics of a two-port sweep"""
    add_report_logger()
    config = PyxbarConfigManager.from_pyxbar_cfg()
    bands = [_stopband(s) for s in stopbands]
    response = _read_sweep(sweep_file)
    m = extract_metrics(
        response,
        bands,
        config("il_floor_db"),
        config("center_convention"),
        config("il_sentinel_db"),
    )
    write_csv(out, metrics_to_frame({os.path.basename(sweep_file): m}))
    logger.success(f"f_c {m.f_c / 1e9:.4f} GHz, IL {m.il_min_db:.3f} dB, FBW {100 * m.fbw_3db:.2f} %")


@cli.command()
@click_loguru.init_logger()
@click.argument("measurement_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--branches", type=click.IntRange(min=1), default=None, help="Number of motional branches")
@click.option("--seed-from", type=click.Path(exists=True, dir_okay=False), help="Resonator JSON to start from")
@click.option("--out", "out", type=click.Path(dir_okay=False), required=True, help="Fitted resonator JSON")
@click.option("--report", type=click.Path(dir_okay=False), help="Per-branch fit report CSV")
@click.option("--restarts", type=click.IntRange(min=1), default=None)
@click.option("--max-iterations", type=click.IntRange(min=1), default=None)
@click.option("--seed", type=int, default=None, help="Seed for restart perturbations")
@click.option("--two-stage", is_flag=True, help="Fit with R0, Rs and Ls frozen first")
@click.option("--peak-weighting", is_flag=True, help="Weight the residual near each resonance")
@click.option("--strict", is_flag=True, help="Fail (exit 3) if the fit does not converge")
@exit_codes
def fit(
    measurement_file,
    branches,
    seed_from,
    out,
    report,
    restarts,
    max_iterations,
    seed,
    two_stage,
    peak_weighting,
    strict,
):
    """Fit an mBVD model to a one-port measurement"""
    add_report_logger()
    data = read_touchstone(measurement_file)
    if not isinstance(data, MeasuredOnePort):
        raise PyxbarValidationError(f"{measurement_file} is not a one-port (.s1p) file")
    if seed_from:
        init = load_resonator(seed_from)
        if branches is not None and branches != init.n_branches:
            raise PyxbarValidationError(
                f"--branches {branches} disagrees with the {init.n_branches} branches in {seed_from}"
            )
    elif branches is None:
        raise PyxbarValidationError("Give --branches or --seed-from")
    else:
        init = initial_guess(data, branches)
    options = FitOptions.from_config(
        restarts=restarts,
        max_iterations=max_iterations,
        seed=seed,
        two_stage=two_stage,
        peak_weighting=peak_weighting,
        strict=strict,
    )
    result = fit_mbvd(data, init, options)
    dump_resonator(result.params, out)
    if report:
        write_csv(report, result.report(init))
    logger.success(f"Fitted {result.params.n_branches} branch(es), residual rms {result.residual_rms:.3e}")


@cli.command()
@click_loguru.init_logger()
@click.argument("design_file", type=click.Path(exists=True, dir_okay=False))
@click.argument("spec_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--budget", type=click.IntRange(min=1), default=None, help="Total number of evaluations")
@click.option("--starts", type=click.IntRange(min=1), default=None, help="Number of simplex starts")
@click.option("--seed", type=int, default=None, help="Seed for the random starts")
@click.option("--out", "out", type=click.Path(dir_okay=False), required=True, help="Best design JSON")
@click.option("--history", type=click.Path(dir_okay=False), help="Evaluation history CSV")
@click.option("--strict", is_flag=True, help="Fail (exit 3) if the budget runs out before the target is met")
@exit_codes
def optimize(design_file, spec_file, budget, starts, seed, out, history, strict):
    """Tune the free parameters of a design against a target spec"""
    add_report_logger()
    config = PyxbarConfigManager.from_pyxbar_cfg()
    doc = load_design(design_file)
    target = load_spec(spec_file)
    result = optimize_design(
        doc.design,
        target.spec,
        target.free,
        doc.grid,
        budget=budget or config("optimize_budget"),
        starts=starts or config("optimize_starts"),
        seed=config("random_seed") if seed is None else seed,
        match=doc.match if target.match is None else target.match,
        il_floor_db=config("il_floor_db"),
        center=config("center_convention"),
    )
    dump_design(doc.with_design(result.design), out)
    if history:
        write_csv(history, result.history)
    if result.budget_exhausted and strict:
        raise BudgetExhausted(f"Budget exhausted with cost {result.cost:.3e}", result=result)
    logger.success(f"Best cost {result.cost:.3e} after {result.evaluations} evaluations")


@cli.command()
@click_loguru.init_logger()
@click.argument("design_files", nargs=-1, required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--spec", "spec_file", type=click.Path(exists=True, dir_okay=False), help="Target spec to optimize for")
@click.option("--budget", type=click.IntRange(min=1), default=None, help="Evaluations per design")
@click.option("--starts", type=click.IntRange(min=1), default=None, help="Number of simplex starts per design")
@click.option("--seed", type=int, default=None, help="Seed for the random starts")
@click.option("--as-is", "as_is", is_flag=True, help="Only cost the designs under --spec, do not optimize them")
@click.option("--out", "out", type=click.Path(dir_okay=False), required=True, help="Comparison table CSV")
@exit_codes
def compare(design_files, spec_file, budget, starts, seed, as_is, out):
    """
    Compare designs side by side.

    With --spec every design is first optimized against the spec's free
    parameters, so topologies are compared at their best rather than as drawn.
    """
    add_report_logger()
    config = PyxbarConfigManager.from_pyxbar_cfg()
    if len(design_files) < 2:
        raise PyxbarValidationError("compare needs at least two design files")
    target = load_spec(spec_file) if spec_file else None
    docs = {}
    for path in design_files:
        doc = load_design(path)
        name = doc.design.name or os.path.splitext(os.path.basename(path))[0]
        if name in docs:
            name = path
        docs[name] = doc
    table = compare_designs(
        {name: doc.design for name, doc in docs.items()},
        {name: doc.grid for name, doc in docs.items()},
        spec=None if target is None else target.spec,
        match={
            name: doc.match if target is None or target.match is None else target.match
            for name, doc in docs.items()
        },
        stopbands={
            name: (target.spec.stopbands if target is not None and target.spec.stopbands else doc.stopbands)
            for name, doc in docs.items()
        },
        il_floor_db=config("il_floor_db"),
        center=config("center_convention"),
        free=() if target is None or as_is else target.free,
        budget=config("optimize_budget") if budget is None else budget,
        starts=config("optimize_starts") if starts is None else starts,
        seed=config("random_seed") if seed is None else seed,
    )
    write_csv(out, table)
    logger.success(f"Compared {len(docs)} designs into {out}")


@cli.command()
@click_loguru.init_logger()
@click.argument("resonator_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "out", type=click.Path(dir_okay=False), required=True, help="Output .s1p file")
@click.option("--f-start-hz", type=float, default=5e9, show_default=True)
@click.option("--f-stop-hz", type=float, default=35e9, show_default=True)
@click.option("--n-points", type=click.IntRange(min=2), default=1501, show_default=True)
@click.option("--noise", type=click.FloatRange(min=0), default=0.0, show_default=True, help="Relative noise level")
@click.option("--seed", type=int, default=0, show_default=True)
@exit_codes
def synthesize(resonator_file, out, f_start_hz, f_stop_hz, n_points, noise, seed):
    """Write a synthetic one-port measurement of a resonator"""
    add_report_logger()
    config = PyxbarConfigManager.from_pyxbar_cfg()
    params = load_resonator(resonator_file)
    grid = FrequencyGrid.linear(f_start_hz, f_stop_hz, n_points)
    measurement = synthesize_measurement(params, grid, noise=noise, seed=seed)
    write_touchstone(
        measurement,
        out,
        fmt=config("touchstone_format"),
        unit=config("touchstone_frequency_unit"),
    )
    logger.success(f"Wrote {n_points} points to {out}")


@cli.command()
@click_loguru.init_logger()
@click.argument("directory", type=click.Path(file_okay=False))
@exit_codes
def demo(directory):
    """Copy the bundled demo designs, spec and resonator into DIRECTORY"""
    os.makedirs(directory, exist_ok=True)
    for name in DEMO_FILES:
        shutil.copyfile(data_path(name), os.path.join(directory, name))
        logger.info(f"Copied {name}")
    logger.success(f"Demo files are in {directory}")


################################################################################
# SUBCOMMANDS
################################################################################


@click_loguru.logging_options
@click.group()
@click_loguru.stash_subcommand()
@click.version_option(version=VERSION, prog_name=NAME)
def validate(verbose, quiet, logfile, profile_mem):
    return 0


@validate.command()
@click_loguru.logging_options
@click_loguru.init_logger()
@click.argument("design_file", type=click.Path(exists=True, dir_okay=False))
@exit_codes
def design(design_file, verbose, quiet, logfile, profile_mem):
    logger.info(f"Checking if a filter design can be built from {design_file}")
    doc = load_design(design_file)
    doc.design.build_netlist()
    logger.success(f"Design {design_file} is valid ({doc.design.resonator_count} resonators)")


@validate.command()
@click_loguru.logging_options
@click_loguru.init_logger()
@click.argument("spec_file", type=click.Path(exists=True, dir_okay=False))
@exit_codes
def spec(spec_file, verbose, quiet, logfile, profile_mem):
    logger.info(f"Checking target spec {spec_file}")
    target = load_spec(spec_file)
    logger.success(f"Spec {spec_file} is valid ({len(target.free)} free parameters)")


cli.add_command(validate)


def main():
    cli(auto_envvar_prefix="PYXBAR")


if __name__ == "__main__":
    sys.exit(main())
