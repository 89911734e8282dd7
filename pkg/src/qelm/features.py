"""Feature matrices passed from simulation or measurement into the readout.

Rows are input samples; column 0 is always the constant bias feature.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

FEATURES_SCHEMA = "qelm.features/1"


@dataclass
class FeatureMatrix:
    """Readout features with a leading bias column and per-column names."""

    values: np.ndarray
    names: tuple[str, ...]

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 2:
            raise ValueError("feature values must be a 2-d array")
        self.names = tuple(self.names)
        if len(self.names) != self.values.shape[1] - 1:
            raise ValueError("need one name per non-bias column")
        if self.values.shape[0] and not np.allclose(self.values[:, 0], 1.0):
            raise ValueError("column 0 must be the constant bias feature")

    @property
    def n_samples(self) -> int:
        return self.values.shape[0]

    @property
    def n_features(self) -> int:
        """Non-bias feature count."""
        return self.values.shape[1] - 1

    def select(self, columns: np.ndarray) -> "FeatureMatrix":
        """Keep the given non-bias columns (positions into ``names``)."""
        columns = np.asarray(columns, dtype=int)
        values = np.concatenate([self.values[:, :1], self.values[:, 1:][:, columns]], axis=1)
        return FeatureMatrix(values, tuple(self.names[c] for c in columns))

    def rows(self, index: np.ndarray) -> "FeatureMatrix":
        return FeatureMatrix(self.values[np.asarray(index)], self.names)


def stack_features(parts: "list[FeatureMatrix]") -> FeatureMatrix:
    """Concatenate feature blocks for the same samples into one matrix."""
    if not parts:
        raise ValueError("nothing to stack")
    rows = {p.n_samples for p in parts}
    if len(rows) != 1:
        raise ValueError("feature blocks disagree on sample count")
    values = np.concatenate([parts[0].values] + [p.values[:, 1:] for p in parts[1:]], axis=1)
    names = tuple(n for p in parts for n in p.names)
    return FeatureMatrix(values, names)


def save_features_csv(path, fm: FeatureMatrix) -> None:
    """Write features to CSV with a schema line and observable names in the header."""
    with open(path, "w", newline="\n") as f:
        f.write(f"# schema: {FEATURES_SCHEMA}\n")
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(("bias",) + fm.names)
        for row in fm.values:
            writer.writerow([repr(float(v)) for v in row])


def load_features_csv(path) -> FeatureMatrix:
    with open(path, "r", newline="") as f:
        schema = f.readline().strip()
        if schema != f"# schema: {FEATURES_SCHEMA}":
            raise ValueError(f"unsupported feature schema line: {schema!r}")
        reader = csv.reader(f)
        header = next(reader)
        rows = [[float(v) for v in row] for row in reader]
    return FeatureMatrix(np.array(rows, dtype=float), tuple(header[1:]))
