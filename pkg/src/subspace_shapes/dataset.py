"""Ingestion of delimited tables into normalized, cluster-labeled datasets."""

from __future__ import annotations

import csv
import io
import logging
from dataclasses import dataclass, field

import numpy as np

log = logging.getLogger(__name__)


class TableError(ValueError):
    """Raised when an input table cannot be turned into a usable dataset."""


@dataclass(frozen=True)
class Dataset:
    """Numeric table with one cluster label per row.

    values is an (n_points, n_dims) float64 matrix of finite reals.
    labels are 0-based contiguous cluster ids; point_ids are stable row
    identifiers from the source file (0-based data-row index).
    """

    column_names: list[str]
    values: np.ndarray
    labels: np.ndarray
    point_ids: np.ndarray
    n_rejected: int = field(default=0, compare=False)

    @property
    def n_points(self) -> int:
        return self.values.shape[0]

    @property
    def n_dims(self) -> int:
        return self.values.shape[1]

    @property
    def n_clusters(self) -> int:
        return int(self.labels.max()) + 1 if self.n_points else 0


def _sniff_delimiter(header_line: str) -> str:
    return "\t" if "\t" in header_line else ","


def load_table(data: bytes | str, label_column: str | None = None) -> Dataset:
    """Parse comma- or tab-delimited text (one header row) into a Dataset.

    The label column, if given, is mapped to contiguous integer ids in
    first-appearance order. Rows with a missing or non-numeric value in any
    numeric column are dropped; the count is kept on the result and logged.
    """
    text = data.decode("utf-8") if isinstance(data, bytes) else data
    first_line = text.split("\n", 1)[0]
    if not first_line.strip():
        raise TableError("malformed header: empty first line")
    delimiter = _sniff_delimiter(first_line)
    reader = csv.reader(io.StringIO(text), delimiter=delimiter)
    try:
        header = next(reader)
    except StopIteration:
        raise TableError("malformed header: no rows at all") from None
    header = [h.strip() for h in header]
    if any(not h for h in header) or len(set(header)) != len(header):
        raise TableError("malformed header: blank or duplicate column names")

    label_idx: int | None = None
    if label_column is not None:
        if label_column not in header:
            raise TableError(f"label column {label_column!r} not found in header")
        label_idx = header.index(label_column)
    numeric_idx = [i for i in range(len(header)) if i != label_idx]

    rows: list[list[float]] = []
    raw_labels: list[str] = []
    point_ids: list[int] = []
    n_rejected = 0
    for row_no, row in enumerate(reader):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(header):
            n_rejected += 1
            continue
        try:
            numeric = [float(row[i]) for i in numeric_idx]
        except ValueError:
            n_rejected += 1
            continue
        if not all(np.isfinite(numeric)):
            n_rejected += 1
            continue
        rows.append(numeric)
        if label_idx is not None:
            raw_labels.append(row[label_idx].strip())
        point_ids.append(row_no)

    if not rows:
        raise TableError("zero usable rows")
    if n_rejected:
        log.warning("rejected %d rows with missing/non-numeric values", n_rejected)

    values = np.asarray(rows, dtype=np.float64)
    if label_idx is None:
        labels = np.zeros(len(rows), dtype=np.int64)
    else:
        seen: dict[str, int] = {}
        labels = np.array([seen.setdefault(s, len(seen)) for s in raw_labels], dtype=np.int64)
    return Dataset(
        column_names=[header[i] for i in numeric_idx],
        values=values,
        labels=labels,
        point_ids=np.asarray(point_ids, dtype=np.int64),
        n_rejected=n_rejected,
    )


def normalize_columns(dataset: Dataset) -> Dataset:
    """Map each column affinely onto [0, 1]; constant columns map to 0.5."""
    lo = dataset.values.min(axis=0)
    hi = dataset.values.max(axis=0)
    span = hi - lo
    constant = span <= 0
    safe_span = np.where(constant, 1.0, span)
    values = (dataset.values - lo) / safe_span
    values[:, constant] = 0.5
    return Dataset(
        column_names=list(dataset.column_names),
        values=values,
        labels=dataset.labels.copy(),
        point_ids=dataset.point_ids.copy(),
        n_rejected=dataset.n_rejected,
    )
