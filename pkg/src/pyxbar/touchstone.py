"""
Touchstone
==========
Reader and writer for Touchstone v1 ``.s1p`` and ``.s2p`` files.

Only scattering parameters are supported. The option line
``# <unit> S <format> R <z0>`` may list its tokens in any order and in any
case; missing tokens take the Touchstone defaults (``GHz``, ``MA``, 50 ohm).
Two-port data lines hold ``f S11 S21 S12 S22`` and may wrap over several
physical lines.

Touchstone v1 has room for a single real reference resistance. Sweeps with
complex or unequal references are written with ``R 50`` on the option line and
their true references in a sidecar ``<file>.refs.json``; :func:`read_touchstone`
picks the sidecar up automatically.

Examples
--------
>>> data = parse_touchstone("# GHz S RI R 50\\n1.0 0.0 0.0\\n", n_ports=1)
>>> data.frequencies
array([1.e+09])
>>> complex(data.s[0, 0, 0])
0j
"""

import pathlib
from dataclasses import dataclass, field
from typing import Optional, Tuple, Union

import numpy as np

from ._version import __version__
from .errors import (
    ComplexReferenceUnsupported,
    MalformedOptionLine,
    NonMonotoneFrequency,
    PyxbarValidationError,
    UnsupportedParameter,
)
from .extraction import MeasuredOnePort
from .files import atomic_write_text, read_json, write_json
from .logging import logger
from .netcore import FrequencyGrid, Kind, SweepResponse, convert
from .units import FREQUENCY_UNITS, canonical_frequency_unit, frequency_multiplier

FORMATS = ("RI", "MA", "DB")
PARAMETERS = ("S", "Y", "Z", "H", "G")
SIDECAR_SUFFIX = ".refs.json"

# data-line order of the two-port entries
_ORDER = [(0, 0), (1, 0), (0, 1), (1, 1)]


@dataclass(frozen=True)
class OptionLine:
    unit: str = "GHz"
    parameter: str = "S"
    fmt: str = "MA"
    z0: float = 50.0

    @classmethod
    def parse(cls, line: str) -> "OptionLine":
        tokens = line.lstrip("#").split()
        values = {}
        i = 0
        while i < len(tokens):
            token = tokens[i].upper()
            if token in (u.upper() for u in FREQUENCY_UNITS):
                values["unit"] = canonical_frequency_unit(token)
            elif token in PARAMETERS:
                if token != "S":
                    raise UnsupportedParameter(
                        f"Only S-parameter files are supported, option line declares {token!r}"
                    )
                values["parameter"] = token
            elif token in FORMATS:
                values["fmt"] = token
            elif token == "R":
                try:
                    values["z0"] = float(tokens[i + 1])
                except (IndexError, ValueError):
                    raise MalformedOptionLine(f"'R' must be followed by a resistance in {line!r}")
                if not values["z0"] > 0:
                    raise MalformedOptionLine(f"Reference resistance must be > 0 in {line!r}")
                i += 1
            else:
                raise MalformedOptionLine(f"Unexpected token {tokens[i]!r} in option line {line!r}")
            i += 1
        return cls(**values)

    def __str__(self):
        return f"# {self.unit} {self.parameter} {self.fmt} R {self.z0:g}"


@dataclass(frozen=True, eq=False)
class TouchstoneData:
    """Raw file contents: frequencies in Hz and an ``(n, ports, ports)`` S array"""

    frequencies: np.ndarray
    s: np.ndarray
    options: OptionLine
    comments: Tuple[str, ...] = field(default_factory=tuple)

    @property
    def n_ports(self):
        return self.s.shape[-1]


def _to_complex(a, b, fmt):
    if fmt == "RI":
        return a + 1j * b
    mag = a if fmt == "MA" else 10 ** (a / 20)
    return mag * np.exp(1j * np.deg2rad(b))


def _from_complex(x, fmt):
    if fmt == "RI":
        return x.real, x.imag
    mag = np.abs(x)
    if fmt == "DB":
        mag = 20 * np.log10(np.maximum(mag, np.finfo(float).tiny))
    return mag, np.rad2deg(np.angle(x))


def parse_touchstone(text: str, n_ports: int) -> TouchstoneData:
    """
    Parse the text of a Touchstone v1 file with ``n_ports`` (1 or 2) ports.

    Raises
    ------
    MalformedOptionLine
        Unknown tokens or a bad reference resistance on the option line.
    UnsupportedParameter
        Y, Z, H or G parameter files.
    NonMonotoneFrequency
        If the frequencies are not strictly increasing.
    """
    if n_ports not in (1, 2):
        raise PyxbarValidationError(f"Only 1- and 2-port files are supported, got {n_ports}")
    options = None
    comments, numbers = [], []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line, _, comment = raw.partition("!")
        if comment.strip() or raw.lstrip().startswith("!"):
            comments.append(comment.strip())
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            if options is None:
                options = OptionLine.parse(line)
            else:
                logger.warning(f"Ignoring repeated option line {lineno}: {line!r}")
            continue
        if line.startswith("["):
            raise PyxbarValidationError(f"Touchstone v2 keyword on line {lineno}; only v1 is supported")
        try:
            numbers.extend(float(t) for t in line.split())
        except ValueError:
            raise PyxbarValidationError(f"Non-numeric data on line {lineno}: {line!r}")
    options = options or OptionLine()
    width = 1 + 2 * n_ports**2
    if not numbers:
        raise PyxbarValidationError("Touchstone file contains no data")
    if len(numbers) % width:
        raise PyxbarValidationError(
            f"Data holds {len(numbers)} values, not a multiple of {width} per frequency"
        )
    table = np.array(numbers).reshape(-1, width)
    f = table[:, 0] * frequency_multiplier(options.unit)
    if np.any(np.diff(f) <= 0):
        bad = int(np.argmax(np.diff(f) <= 0)) + 1
        raise NonMonotoneFrequency(
            f"Frequency {f[bad]:.9g} Hz at data point {bad + 1} does not exceed its predecessor"
        )
    values = _to_complex(table[:, 1::2], table[:, 2::2], options.fmt)
    s = np.zeros((f.size, n_ports, n_ports), dtype=complex)
    order = _ORDER if n_ports == 2 else [(0, 0)]
    for k, (i, j) in enumerate(order):
        s[:, i, j] = values[:, k]
    return TouchstoneData(f, s, options, tuple(comments))


def _n_ports(path: pathlib.Path):
    suffix = path.suffix.lower()
    if suffix == ".s1p":
        return 1
    if suffix == ".s2p":
        return 2
    raise PyxbarValidationError(f"Expected a .s1p or .s2p file, got {path.name!r}")


def sidecar_path(path) -> pathlib.Path:
    path = pathlib.Path(path)
    return path.with_name(path.name + SIDECAR_SUFFIX)


def read_touchstone(path) -> Union[MeasuredOnePort, SweepResponse]:
    """
    Read a ``.s1p`` as :class:`MeasuredOnePort` or a ``.s2p`` as an S-parameter
    :class:`SweepResponse`.

    One-port reflection data is converted to admittance with the option-line
    reference resistance.
    """
    path = pathlib.Path(path)
    n_ports = _n_ports(path)
    data = parse_touchstone(path.read_text(encoding="utf-8"), n_ports)
    logger.info(f"Read {data.frequencies.size} points from {path}")
    if data.frequencies.size < 2:
        raise PyxbarValidationError(f"{path} holds a single frequency; a sweep needs at least 2")
    grid = FrequencyGrid(data.frequencies)
    if n_ports == 1:
        return MeasuredOnePort.from_s11(
            grid, data.s[:, 0, 0], data.options.z0, source=str(path), comments=data.comments
        )
    refs = (data.options.z0, data.options.z0)
    sidecar = sidecar_path(path)
    if sidecar.exists():
        refs = tuple(complex(re, im) for re, im in read_json(sidecar)["ref_impedances_ohm"])
        logger.info(f"Using reference impedances {refs} from {sidecar}")
    return SweepResponse(grid, Kind.S, data.s, refs, data.comments)


def _uniform_real_reference(refs) -> Optional[float]:
    refs = [complex(z) for z in refs]
    if all(z.imag == 0 for z in refs) and len({z.real for z in refs}) == 1:
        return refs[0].real
    return None


def write_touchstone(
    r: Union[SweepResponse, MeasuredOnePort],
    path,
    fmt: str = "MA",
    unit: str = "GHz",
    sidecar: bool = False,
) -> pathlib.Path:
    """
    Write a two-port sweep (``.s2p``) or a one-port measurement (``.s1p``).

    Non-S sweeps are converted to S at 50 ohm first. Numbers are written with
    ``%.12e`` so the output is byte-stable for a given input.

    Raises
    ------
    ComplexReferenceUnsupported
        If the references are complex or differ between ports and ``sidecar``
        is not set.
    """
    path = pathlib.Path(path)
    fmt = fmt.upper()
    if fmt not in FORMATS:
        raise PyxbarValidationError(f"Unknown Touchstone format {fmt!r}, expected one of {FORMATS}")
    unit = canonical_frequency_unit(unit)
    if len(r.grid) == 0:
        raise PyxbarValidationError("Refusing to write an empty sweep")

    extra = None
    if isinstance(r, MeasuredOnePort):
        if _n_ports(path) != 1:
            raise PyxbarValidationError(f"One-port data must go to a .s1p file, got {path.name!r}")
        z0 = 50.0
        columns = [r.s11(z0)]
        comments = r.comments
    else:
        if _n_ports(path) != 2:
            raise PyxbarValidationError(f"Two-port data must go to a .s2p file, got {path.name!r}")
        if r.kind is not Kind.S:
            r = convert(r, Kind.S)
        z0 = _uniform_real_reference(r.ref_impedances)
        if z0 is None:
            if not sidecar:
                raise ComplexReferenceUnsupported(
                    f"Reference impedances {list(r.ref_impedances)} cannot be expressed in "
                    "Touchstone v1; write a sidecar file (--sidecar) or renormalize to a real reference"
                )
            z0 = 50.0
            extra = {
                "ref_impedances_ohm": [[complex(z).real, complex(z).imag] for z in r.ref_impedances],
                "note": "S-parameters in the data file are referenced to these impedances, not to R on the option line",
            }
        columns = [r.data[:, i, j] for i, j in _ORDER]
        comments = r.comments

    options = OptionLine(unit, "S", fmt, z0)
    lines = [f"! pyxbar {__version__}"]
    lines += [f"! {c}" for c in comments if c and not c.startswith("pyxbar ")]
    lines.append(str(options))
    f = r.grid.points / frequency_multiplier(unit)
    pairs = [_from_complex(np.asarray(c), fmt) for c in columns]
    for k in range(f.size):
        fields = [f"{f[k]:.12e}"]
        for a, b in pairs:
            fields += [f"{a[k]:.12e}", f"{b[k]:.12e}"]
        lines.append(" ".join(fields))
    atomic_write_text(path, "\n".join(lines) + "\n")
    if extra is not None:
        write_json(sidecar_path(path), extra)
    elif sidecar_path(path).exists():
        sidecar_path(path).unlink()
    logger.info(f"Wrote {f.size} points to {path}")
    return path
