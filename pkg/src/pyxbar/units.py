"""
Units
=====
Frequency-unit handling for file formats. Internally everything is SI (Hz, ohm,
F, H); units only show up at the Touchstone boundary.

    >>> frequency_multiplier("GHz")
    1000000000.0
    >>> frequency_multiplier("khz")
    1000.0
"""

import pint_xarray

from .errors import PyxbarValidationError
from .logging import logger

ureg = pint_xarray.unit_registry

FREQUENCY_UNITS = ("Hz", "kHz", "MHz", "GHz")
"""tuple : Frequency units accepted in Touchstone option lines."""


def canonical_frequency_unit(token: str) -> str:
    """Map a case-insensitive Touchstone unit token onto its canonical spelling"""
    for unit in FREQUENCY_UNITS:
        if token.lower() == unit.lower():
            return unit
    raise PyxbarValidationError(f"Unknown frequency unit {token!r}, expected one of {FREQUENCY_UNITS}")


def frequency_multiplier(unit: str) -> float:
    """Factor that converts a value in ``unit`` to Hz"""
    unit = canonical_frequency_unit(unit)
    factor = float(ureg.Quantity(1.0, unit).to("Hz").magnitude)
    logger.debug(f"1 {unit} = {factor} Hz")
    return factor
