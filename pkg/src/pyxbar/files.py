"""
Files
=====
Atomic writes for every artifact ``pyxbar`` produces. Data is first written to a
temporary file in the target directory and then moved into place with
:func:`os.replace`, so an interrupted run never leaves a truncated file behind.
"""

import io
import json
import os
import pathlib
import tempfile

import pandas as pd

from .logging import logger


def atomic_write_text(path, text: str) -> pathlib.Path:
    path = pathlib.Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(
        prefix=f".{path.name}.", suffix=".tmp", dir=path.parent
    )
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as f:
            f.write(text)
        os.replace(tmp_name, path)
    except BaseException:
        if os.path.exists(tmp_name):
            os.remove(tmp_name)
        raise
    logger.debug(f"Wrote {path}")
    return path


def write_json(path, document) -> pathlib.Path:
    return atomic_write_text(path, json.dumps(document, indent=2, sort_keys=False) + "\n")


def read_json(path):
    with open(path, "r", encoding="utf-8") as f:
        return json.load(f)


def write_csv(path, df: pd.DataFrame, index=False) -> pathlib.Path:
    """Write a frame as CSV; pandas always uses ``.`` as decimal separator"""
    buffer = io.StringIO()
    df.to_csv(buffer, index=index, float_format="%.12g", lineterminator="\n")
    return atomic_write_text(path, buffer.getvalue())


def export_plot_data(path, response) -> pathlib.Path:
    """Write a sweep as tidy CSV (one row per frequency, S entries as columns)"""
    ds = response.to_xarray()
    df = ds.to_dataframe().unstack(["row", "col"])
    df.columns = [f"{var}_S{row}{col}" for var, row, col in df.columns]
    df.index.name = "frequency_Hz"
    return write_csv(path, df, index=True)
