"""CSV emission with exact float round-trips.

Floats are written with ``repr``, the shortest decimal form that parses back
to the identical IEEE-754 double, so emitted files diff cleanly and re-reading
them reproduces the in-memory values bit for bit.  Divergent theory values
are the literal token ``inf``; fields that do not apply in a given mode stay
empty.
"""

from __future__ import annotations

import csv
import math

SCHEMA_VERSION = "rlfeat-sweep-v1"
SWEEP_COLUMNS = (
    "alpha_f",
    "alpha_p",
    "n_f",
    "n_p",
    "m",
    "quantity",
    "theory",
    "sim_mean",
    "sim_stderr",
    "trials",
)

SPECTRUM_SCHEMA_VERSION = "rlfeat-spectrum-v1"
SPECTRUM_COLUMNS = ("x", "rho", "edge_min", "edge_max", "f_zero")


def format_value(value):
    """Shortest round-trip text for a CSV cell; None renders empty."""
    if value is None:
        return ""
    if isinstance(value, float):
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return repr(value)
    return str(value)


def parse_value(text):
    """Inverse of format_value for numeric cells."""
    if text == "":
        return None
    return float(text)


def write_rows(path, columns, rows, schema=SCHEMA_VERSION):
    """Write one CSV: a schema comment line, the header, then the rows.

    ``rows`` are mappings from column name to cell value; missing keys render
    as empty cells.  Output uses Unix newlines unconditionally so reruns are
    byte-identical across platforms.
    """
    with open(path, "w", encoding="utf-8", newline="") as handle:
        handle.write(f"# schema: {schema}\n")
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([format_value(row.get(name)) for name in columns])


def read_rows(path):
    """Read a CSV written by write_rows; numeric cells become floats.

    Returns (schema, columns, rows) with rows as dicts.  The quantity column
    stays a string; everything else parses with float, so "inf" tokens come
    back as math.inf and empty cells as None.
    """
    with open(path, encoding="utf-8", newline="") as handle:
        schema_line = handle.readline().strip()
        schema = schema_line.removeprefix("# schema: ")
        reader = csv.reader(handle)
        columns = tuple(next(reader))
        rows = []
        for record in reader:
            row = {}
            for name, cell in zip(columns, record):
                row[name] = cell if name == "quantity" else parse_value(cell)
            rows.append(row)
    return schema, columns, rows
