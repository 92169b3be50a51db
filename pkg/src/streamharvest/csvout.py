"""Deterministic CSV output (17 significant digits, '\\n' line endings)."""

from __future__ import annotations

import csv
import io
import math
import sys

import numpy as np


def format_cell(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        v = float(value)
        if math.isnan(v):
            return "nan"
        return format(v, ".17g")
    return str(value)


def render_csv(header, rows, comments=()) -> str:
    """CSV text for a rectangular table; ``comments`` become leading '# ' lines."""
    width = len(header)
    buf = io.StringIO()
    for line in comments:
        buf.write(f"# {line}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow([str(h) for h in header])
    for row in rows:
        row = list(row)
        if len(row) != width:
            raise ValueError(f"row has {len(row)} cells, header has {width}")
        writer.writerow([format_cell(v) for v in row])
    return buf.getvalue()


def emit_csv(header, rows, destination=None, comments=()) -> None:
    """Write the table to ``destination`` (a path) or to stdout when None."""
    text = render_csv(header, rows, comments)
    if destination is None:
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    with open(destination, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
