"""Prototypical positive objects: how many classified positives each training object wins."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError


@dataclass(frozen=True)
class HistogramRow:
    train_id: int
    count: int
    fraction: float


@dataclass(frozen=True)
class PrototypeHistogram:
    rows: tuple[HistogramRow, ...]
    total: int

    def table(self) -> str:
        """Three right-aligned columns: training id, H(y) in percent, n(y)."""
        out = [f"{'y':>8} {'H(y)%':>7} {'n(y)':>6}"]
        out += [f"{r.train_id:>8} {format_percent(r.fraction):>7} {r.count:>6}" for r in self.rows]
        return "\n".join(out)

    def counts(self) -> np.ndarray:
        return np.array([r.count for r in self.rows], dtype=np.int64)


def format_percent(fraction: float) -> str:
    return f"{100 * fraction:.2f}"


def prototype_histogram(winners, truth, train_ids=None, include_zero: bool = False) -> PrototypeHistogram:
    """Count, per training object, the classified positives whose score it attains.

    ``winners`` holds the winning training id for each classified object and
    ``truth`` the objects' labels; only positive objects are counted. Rows
    are sorted by count descending, then id ascending. Training objects that
    win nothing are listed only with ``include_zero`` (needs ``train_ids``).
    """
    winners = np.asarray(winners, dtype=np.int64)
    truth = np.asarray(truth).astype(bool)
    if winners.shape != truth.shape:
        raise DataError("winners and truth differ in length")
    won = winners[truth]
    if len(won) == 0:
        raise DataError("no positive objects outside the training set")
    ids, counts = np.unique(won, return_counts=True)
    tally = dict(zip(ids.tolist(), counts.tolist()))
    if include_zero:
        if train_ids is None:
            raise DataError("include_zero needs the training ids")
        for t in np.asarray(train_ids).tolist():
            tally.setdefault(int(t), 0)
    total = len(won)
    rows = sorted(tally.items(), key=lambda kv: (-kv[1], kv[0]))
    return PrototypeHistogram(tuple(HistogramRow(int(i), int(n), n / total) for i, n in rows), total)


def gini(values) -> float:
    """Gini coefficient sum_ij |y_i - y_j| / (2 n sum_i y_i), via the sorted-rank identity."""
    y = np.sort(np.asarray(values, dtype=np.float64))
    if y.ndim != 1 or len(y) == 0:
        raise DataError("gini needs a non-empty 1-d input")
    if (y < 0).any():
        raise DataError("gini needs non-negative values")
    total = y.sum()
    if total <= 0:
        raise DataError("gini is undefined for all-zero input")
    n = len(y)
    ranks = np.arange(1, n + 1)
    return float(np.sum((2 * ranks - n - 1) * y) / (n * total))
