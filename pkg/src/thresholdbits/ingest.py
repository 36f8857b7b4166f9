"""Loading labeled measurement matrices and selecting column ranges."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import ConfigError, DataError, LabelNotBinary

DELIMITERS = ",;\t"


@dataclass(frozen=True, eq=False)
class Dataset:
    """An m x n measurement matrix with one binary label and one id per row.

    ``labels[i] == 1`` marks row i as a positive (defective) object.
    """

    values: np.ndarray
    labels: np.ndarray
    ids: np.ndarray = None
    column_names: tuple[str, ...] = None

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 2:
            if values.size == 0:
                values = values.reshape(len(self.labels), 0)
            else:
                raise DataError(f"values must be 2-dimensional, got shape {values.shape}")
        m, n = values.shape
        labels = np.asarray(self.labels)
        if labels.shape != (m,):
            raise DataError(f"labels has shape {labels.shape}, expected ({m},)")
        if not np.isin(labels, (0, 1)).all():
            raise LabelNotBinary("labels must be 0 or 1")
        labels = labels.astype(np.uint8)
        ids = np.arange(m, dtype=np.int64) if self.ids is None else np.asarray(self.ids, dtype=np.int64)
        if ids.shape != (m,):
            raise DataError(f"ids has shape {ids.shape}, expected ({m},)")
        if m and ids.min() < 0:
            raise DataError("ids must be non-negative")
        if len(np.unique(ids)) != m:
            raise DataError("duplicate object ids")
        if not np.isfinite(values).all():
            bad = np.argwhere(~np.isfinite(values))[:10].tolist()
            raise DataError(f"non-finite measurement values at (row, col) {bad}")
        names = self.column_names
        names = tuple(f"c{j}" for j in range(n)) if names is None else tuple(names)
        if len(names) != n:
            raise DataError(f"{len(names)} column names for {n} columns")
        for arr in (values, labels, ids):
            arr.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "ids", ids)
        object.__setattr__(self, "column_names", names)

    @property
    def m(self) -> int:
        return self.values.shape[0]

    @property
    def n(self) -> int:
        return self.values.shape[1]

    @property
    def positives(self) -> np.ndarray:
        """Row indices of positive objects."""
        return np.flatnonzero(self.labels == 1)

    def with_values(self, values: np.ndarray, column_names=None) -> "Dataset":
        return Dataset(values, self.labels, self.ids, column_names)

    def __eq__(self, other):
        if not isinstance(other, Dataset):
            return NotImplemented
        return (
            self.values.shape == other.values.shape
            and np.array_equal(self.values, other.values)
            and np.array_equal(self.labels, other.labels)
            and np.array_equal(self.ids, other.ids)
            and self.column_names == other.column_names
        )


@dataclass(frozen=True)
class ColumnSelection:
    """Which columns to keep: all of them, an inclusive range, or an explicit list."""

    kind: str = "all"
    first: int = 0
    last: int = 0
    indices: tuple[int, ...] = field(default_factory=tuple)

    @classmethod
    def all(cls) -> "ColumnSelection":
        return cls("all")

    @classmethod
    def range(cls, first: int, last: int) -> "ColumnSelection":
        if first > last:
            raise ConfigError(f"empty column range {first}..{last}")
        return cls("range", first=first, last=last)

    @classmethod
    def explicit(cls, indices: Sequence[int]) -> "ColumnSelection":
        return cls("list", indices=tuple(int(i) for i in indices))

    @classmethod
    def parse(cls, spec: str) -> "ColumnSelection":
        """Parse ``all``, ``a..b`` (inclusive) or a comma list like ``3,1``."""
        spec = spec.strip()
        try:
            if spec == "all":
                return cls.all()
            if ".." in spec:
                a, b = spec.split("..", 1)
                return cls.range(int(a), int(b))
            return cls.explicit(int(tok) for tok in spec.split(",") if tok.strip())
        except ValueError as exc:
            raise ConfigError(f"bad column spec {spec!r}: {exc}") from None

    def resolve(self, n: int) -> list[int]:
        if self.kind == "all":
            return list(range(n))
        if self.kind == "range":
            idx = list(range(self.first, self.last + 1))
        elif self.kind == "list":
            idx = list(self.indices)
        else:
            raise ConfigError(f"unknown selection kind {self.kind!r}")
        bad = [i for i in idx if not 0 <= i < n]
        if bad:
            raise DataError(f"column indices out of range [0, {n}): {bad[:10]}")
        return idx


def select_columns(d: Dataset, sel: ColumnSelection) -> Dataset:
    idx = sel.resolve(d.n)
    if sel.kind == "all":
        return d
    return d.with_values(d.values[:, idx], [d.column_names[j] for j in idx])


def _is_number(text: str) -> bool:
    try:
        float(text)
    except ValueError:
        return False
    return True


def _sniff_delimiter(sample: str) -> str:
    try:
        return csv.Sniffer().sniff(sample, delimiters=DELIMITERS).delimiter
    except csv.Error:
        return ","


def _column_index(ref, header: list[str] | None, width: int, what: str) -> int:
    if isinstance(ref, str) and header is not None and ref in header:
        return header.index(ref)
    try:
        idx = int(ref)
    except (TypeError, ValueError):
        raise DataError(f"{what} column {ref!r} not found") from None
    if not -width <= idx < width:
        raise DataError(f"{what} column index {idx} out of range")
    return idx % width


def load_csv(path, label_column=0, id_column=None) -> Dataset:
    """Read a delimited numeric file into a :class:`Dataset`.

    The delimiter is detected among comma, semicolon and tab. The first row is
    taken as a header when any of its cells is non-numeric. Every column other
    than the label and id columns is a measurement. With ``label_column=None``
    the file has no label column and every object is labelled 0.
    """
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    delimiter = _sniff_delimiter(text[:8192])
    rows = [r for r in csv.reader(text.splitlines(), delimiter=delimiter) if any(c.strip() for c in r)]
    if not rows:
        raise DataError(f"{path}: no data")
    header = None
    if not all(_is_number(c) for c in rows[0]):
        header = [c.strip() for c in rows[0]]
        rows = rows[1:]
    width = len(header) if header is not None else len(rows[0]) if rows else 0
    label_idx = None if label_column is None else _column_index(label_column, header, width, "label")
    id_idx = None if id_column is None else _column_index(id_column, header, width, "id")
    meas_idx = [j for j in range(width) if j not in (label_idx, id_idx)]

    problems = []
    values = np.empty((len(rows), len(meas_idx)))
    labels = np.empty(len(rows), dtype=np.uint8)
    ids = np.empty(len(rows), dtype=np.int64)
    line0 = 2 if header is not None else 1
    for i, row in enumerate(rows):
        line = line0 + i
        if len(row) != width:
            problems.append(f"line {line}: {len(row)} fields, expected {width}")
            continue
        for k, j in enumerate(meas_idx):
            try:
                v = float(row[j])
            except ValueError:
                problems.append(f"line {line} col {j}: non-numeric {row[j]!r}")
                continue
            if not math.isfinite(v):
                problems.append(f"line {line} col {j}: non-finite {row[j]!r}")
            values[i, k] = v
        if label_idx is None:
            labels[i] = 0
        else:
            try:
                lab = float(row[label_idx])
            except ValueError:
                lab = math.nan
            if lab not in (0.0, 1.0):
                raise LabelNotBinary(f"{path} line {line}: label {row[label_idx]!r} is not 0 or 1")
            labels[i] = int(lab)
        if id_idx is not None:
            try:
                ids[i] = int(row[id_idx])
            except ValueError:
                problems.append(f"line {line}: id {row[id_idx]!r} is not an integer")
    if problems:
        shown = "; ".join(problems[:20])
        more = f" (+{len(problems) - 20} more)" if len(problems) > 20 else ""
        raise DataError(f"{path}: {len(problems)} bad cells: {shown}{more}")
    names = [header[j] for j in meas_idx] if header is not None else None
    return Dataset(values, labels, ids if id_idx is not None else None, names)


def write_csv(d: Dataset, path) -> None:
    """Write ``id,label,<columns>``; floats use shortest round-trip repr."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["id", "label", *d.column_names])
        for i in range(d.m):
            w.writerow([int(d.ids[i]), int(d.labels[i]), *(repr(float(v)) for v in d.values[i])])
