"""Bundled public data."""

from __future__ import annotations

import csv
from importlib import resources

import numpy as np

from .errors import ConfigError
from .ingest import Dataset

IRIS_SPECIES = ("setosa", "versicolor", "virginica")


def iris(target: str) -> Dataset:
    """Fisher's iris data (UCI corrected version, 150 rows) with ``target`` as the positive class."""
    if target not in IRIS_SPECIES:
        raise ConfigError(f"unknown iris species {target!r}; expected one of {IRIS_SPECIES}")
    with resources.files(__package__).joinpath("data/iris.csv").open() as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    values = np.array([[float(v) for v in r[:4]] for r in body])
    labels = np.array([r[4] == target for r in body], dtype=np.uint8)
    return Dataset(values, labels, None, header[:4])
