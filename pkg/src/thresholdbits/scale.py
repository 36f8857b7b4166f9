"""Column-wise auto-scaling (z-scores with a zero-variance guard)."""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .errors import DataError
from .ingest import Dataset


@dataclass(frozen=True, eq=False)
class ScalingParams:
    mu: np.ndarray
    sigma: np.ndarray

    def __post_init__(self):
        mu = np.asarray(self.mu, dtype=np.float64)
        sigma = np.asarray(self.sigma, dtype=np.float64)
        if mu.shape != sigma.shape or mu.ndim != 1:
            raise DataError("mu and sigma must be 1-d arrays of equal length")
        if (sigma < 0).any():
            raise DataError("sigma must be non-negative")
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "sigma", sigma)

    @property
    def n(self) -> int:
        return len(self.mu)

    def __eq__(self, other):
        if not isinstance(other, ScalingParams):
            return NotImplemented
        return np.array_equal(self.mu, other.mu) and np.array_equal(self.sigma, other.sigma)


def fit_scaling(d: Dataset) -> ScalingParams:
    """Per-column mean and population standard deviation (divisor m).

    Columns whose entries are all identical get sigma exactly 0, so rounding
    in the mean can never turn a constant column into noise.
    """
    if d.m == 0:
        raise DataError("cannot fit scaling on an empty dataset")
    x = d.values
    mu = x.mean(axis=0)
    sigma = x.std(axis=0)
    constant = (x == x[0]).all(axis=0)
    sigma[constant] = 0.0
    return ScalingParams(mu, sigma)


def scale_values(values: np.ndarray, s: ScalingParams) -> np.ndarray:
    values = np.asarray(values, dtype=np.float64)
    if values.shape[-1] != s.n:
        raise DataError(f"data has {values.shape[-1]} columns, scaling was fitted on {s.n}")
    safe = np.where(s.sigma == 0, 1.0, s.sigma)
    out = (values - s.mu) / safe
    out[..., s.sigma == 0] = 0.0
    return out


def apply_scaling(d: Dataset, s: ScalingParams) -> Dataset:
    return d.with_values(scale_values(d.values, s), d.column_names)


def autoscale(d: Dataset) -> tuple[Dataset, ScalingParams]:
    s = fit_scaling(d)
    return apply_scaling(d, s), s


def save_scaling(s: ScalingParams, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["column", "mu", "sigma"])
        for j in range(s.n):
            w.writerow([j, repr(float(s.mu[j])), repr(float(s.sigma[j]))])


def load_scaling(path) -> ScalingParams:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    try:
        rows.sort(key=lambda r: int(r["column"]))
        return ScalingParams([float(r["mu"]) for r in rows], [float(r["sigma"]) for r in rows])
    except (KeyError, ValueError) as exc:
        raise DataError(f"{path}: malformed scaling file ({exc})") from exc
