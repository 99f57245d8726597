"""
Writers for the data files produced by the CLI

CSV files start with '# key=value' metadata lines and use 17 significant
digits. JSON files carry the same metadata under "metadata". Nothing time or
host dependent is written, so identical inputs give byte-identical files.
"""
from __future__ import annotations

import json
import logging
from pathlib import Path

import numpy as np
import pandas as pd

from . import __version__

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.16e"


def format_value(value):
    if isinstance(value, (float, np.floating)):
        return FLOAT_FORMAT % value
    if isinstance(value, (tuple, list)):
        return ":".join(format_value(item) for item in value)
    return str(value)


def metadata_lines(meta):
    """'# key=value' header lines, generated-by first"""
    lines = [f"# generated-by=deltawell {__version__}"]
    lines += [f"# {key}={format_value(value)}" for key, value in meta.items()]
    return lines


def _json_ready(value):
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    if isinstance(value, np.ndarray):
        return [_json_ready(item) for item in value.tolist()]
    if isinstance(value, tuple):
        return [_json_ready(item) for item in value]
    if isinstance(value, dict):
        return {key: _json_ready(item) for key, item in value.items()}
    return value


def write_table(frame: pd.DataFrame, path, meta, fmt="csv", trailer=None):
    """
    Write a data table with its metadata header

    Args:
        frame (pandas.DataFrame): Columns to write, in order
        path (str | Path): Destination file
        meta (dict): Metadata written before the data
        fmt (str): "csv" or "json"
        trailer (dict, optional): Extra key=value block written after the data
            (comment lines in CSV, a "fit" object in JSON)
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if fmt == "json":
        document = {
            "generated_by": f"deltawell {__version__}",
            "metadata": _json_ready(meta),
            "columns": list(frame.columns),
            "rows": _json_ready(frame.to_numpy()),
        }
        if trailer:
            document["fit"] = _json_ready(trailer)
        path.write_text(json.dumps(document, indent=2) + "\n", encoding="utf-8")
    else:
        with open(path, "w", encoding="utf-8", newline="") as handle:
            handle.write("\n".join(metadata_lines(meta)) + "\n")
            frame.to_csv(handle, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
            if trailer:
                for key, value in trailer.items():
                    handle.write(f"# {key}={format_value(value)}\n")
    logger.info("wrote %d rows to %s", len(frame), path)
    return path


def read_table(path):
    """Read a CSV written by `write_table` into (frame, metadata)"""
    meta = {}
    with open(path, encoding="utf-8") as handle:
        for line in handle:
            if line.startswith("#"):
                key, _, value = line[1:].strip().partition("=")
                meta[key] = value
    frame = pd.read_csv(path, comment="#")
    return frame, meta


def fit_trailer(result):
    """Flat key=value block of an exponential fit"""
    return {
        "a": result.a,
        "b": result.b,
        "window": result.window,
        "chi2_per_dof": result.chi2_per_dof,
        "n": result.n_points,
    }


def write_gnuplot(data_path, columns, plotted, title, log_scale=False):
    """
    Plain gnuplot script next to a CSV, plotting `plotted` against its first column

    Args:
        data_path (str | Path): CSV written by `write_table`
        columns (list): All column names of the CSV, in order
        plotted (list): Names of the columns to draw
        title (str): Plot title
        log_scale (bool): Log axes
    """
    data_path = Path(data_path)
    script = data_path.with_suffix(".gp")
    lines = [
        f"# generated-by=deltawell {__version__}",
        "set datafile separator ','",
        "set datafile commentschars '#'",
        "set key autotitle columnhead",
        f"set title '{title}'",
        f"set xlabel '{columns[0]}'",
    ]
    if log_scale:
        lines.append("set logscale xy")
    columns = list(columns)
    plots = [f"'{data_path.name}' using 1:{columns.index(name) + 1} with lines" for name in plotted]
    lines.append("plot " + ", ".join(plots))
    script.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return script
