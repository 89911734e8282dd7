"""Versioned CSV tables written by the workbench commands.

Every table opens with a ``# schema:`` comment line. Anything this package
does not recognize is rejected before a single point is drawn, so a figure
can never silently render from data it misreads.
"""
import csv

SCHEMAS = {
    "r2_vs_order": "qelm.r2_vs_order/1",
    "ablation": "qelm.ablation/1",
    "learning_curve": "qelm.learning_curve/1",
    "lambda_sweep": "qelm.lambda_sweep/1",
    "retained": "qelm.retained/1",
    "rec": "qelm.rec/1",
    "pareto": "qelm.pareto/1",
}

MANIFEST_SCHEMA = "qelm.manifest/1"


class Table:
    """Header-indexed string cells from one validated CSV."""

    def __init__(self, path, header, rows):
        self.path = str(path)
        self.header = header
        self.rows = rows

    def __len__(self):
        return len(self.rows)

    def column(self, name):
        if name not in self.header:
            raise ValueError(f"{self.path}: missing column {name!r}")
        index = self.header.index(name)
        return [row[index] for row in self.rows]

    def floats(self, name):
        return [float(v) for v in self.column(name)]

    def maybe_floats(self, name):
        """Float column where empty cells (no CI requested) become None."""
        return [float(v) if v != "" else None for v in self.column(name)]


def read_table(path, kind):
    expected = SCHEMAS[kind]
    with open(path, "r", newline="") as f:
        schema_line = f.readline().strip()
        rows = list(csv.reader(f))
    if schema_line != f"# schema: {expected}":
        raise ValueError(f"{path}: expected schema {expected!r}, found {schema_line!r}")
    if not rows:
        raise ValueError(f"{path}: missing header row")
    header, data = tuple(rows[0]), rows[1:]
    if not data:
        raise ValueError(f"{path}: no data rows")
    width = len(header)
    for lineno, row in enumerate(data, start=3):
        if len(row) != width:
            raise ValueError(f"{path}:{lineno}: expected {width} cells, found {len(row)}")
    return Table(path, header, data)
