"""Column elimination by where positive objects peak.

For each positive row of the auto-scaled matrix, the columns attaining the
row's maximum absolute value (all ties) are recorded. A column survives when
at least ``sharpness`` positive rows peak there.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DataError
from .ingest import Dataset


@dataclass(frozen=True, eq=False)
class ReductionPlan:
    kept_columns: tuple[int, ...]
    num_occu: np.ndarray
    sharpness: int

    @property
    def n(self) -> int:
        return len(self.num_occu)

    @property
    def n_kept(self) -> int:
        return len(self.kept_columns)

    @property
    def percent_omitted(self) -> float:
        return 100.0 * (self.n - self.n_kept) / self.n if self.n else 0.0

    def write_csv(self, path) -> None:
        kept = set(self.kept_columns)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["column", "num_occu", "kept"])
            for j, k in enumerate(self.num_occu):
                w.writerow([j, int(k), int(j in kept)])


def _looks_unscaled(values: np.ndarray) -> bool:
    mean = values.mean(axis=0)
    std = values.std(axis=0)
    off_mean = np.abs(mean) > 1e-6
    off_std = (np.abs(std) > 1e-6) & (np.abs(std - 1) > 1e-6)
    return bool((off_mean & off_std).any())


def plan_reduction(d: Dataset, sharpness: int) -> ReductionPlan:
    if sharpness < 0:
        raise DataError("sharpness must be >= 0")
    pos = d.positives
    if len(pos) == 0:
        raise DataError("dimensional reduction needs at least one positive row")
    if _looks_unscaled(d.values):
        warnings.warn("plan_reduction expects column-wise auto-scaled data", stacklevel=2)
    a = np.abs(d.values[pos])
    if d.n == 0:
        return ReductionPlan((), np.zeros(0, np.int64), sharpness)
    at_max = a == a.max(axis=1, keepdims=True)
    num_occu = at_max.sum(axis=0, dtype=np.int64)
    kept = tuple(int(j) for j in np.flatnonzero(num_occu >= sharpness))
    return ReductionPlan(kept, num_occu, sharpness)


def apply_reduction(d: Dataset, plan: ReductionPlan) -> Dataset:
    if d.n != plan.n:
        raise DataError(f"plan was built for {plan.n} columns, dataset has {d.n}")
    idx = list(plan.kept_columns)
    return d.with_values(d.values[:, idx], [d.column_names[j] for j in idx])
