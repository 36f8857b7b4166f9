"""Wafer-like synthetic test data with planted defect signatures.

Each column is a measurement with its own nominal value and resolution
(quantum). A non-defective chip reads ``nominal + quantum * round(noise)``
with ``noise ~ N(0, noise_sigma^2)``, so most readings sit exactly on the
nominal value and a minority land one or two quanta off, as with
digitized tester readings. A defective chip gets the same noise plus its
archetype's excess on the archetype's columns: a shift drawn per chip and
column from 3 to 6 quanta, far beyond two standard deviations of the
column. Drawing the shift per chip keeps any one archetype column from
always carrying the largest excess.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .ingest import Dataset


@dataclass(frozen=True)
class SyntheticSpec:
    m: int = 10_000
    n: int = 900
    defect_rate: float = 0.05
    archetypes: int = 2
    archetype_size: int | None = None  # columns per archetype; default max(2, n // 20)
    noise_sigma: float = 0.3
    seed: int = 1
    min_excess: float = 3.0
    max_excess: float = 6.0

    def __post_init__(self):
        if self.m < 1 or self.n < 1:
            raise ConfigError("m and n must be positive")
        if not 0 < self.defect_rate < 1:
            raise ConfigError("defect_rate must be in (0, 1)")
        if self.archetypes < 1:
            raise ConfigError("need at least one archetype")
        if self.noise_sigma < 0:
            raise ConfigError("noise_sigma must be >= 0")
        if not 0 < self.min_excess <= self.max_excess:
            raise ConfigError("need 0 < min_excess <= max_excess")
        if self.size * self.archetypes > self.n:
            raise ConfigError(f"{self.archetypes} disjoint archetypes of {self.size} columns exceed n = {self.n}")

    @property
    def size(self) -> int:
        return self.archetype_size if self.archetype_size is not None else max(2, self.n // 20)


@dataclass(frozen=True, eq=False)
class SyntheticData:
    dataset: Dataset
    archetype_columns: tuple[tuple[int, ...], ...]
    archetype_of_row: np.ndarray  # -1 for negative rows


def gen_synthetic(spec: SyntheticSpec) -> SyntheticData:
    rng = np.random.default_rng(spec.seed)
    m, n = spec.m, spec.n
    nominal = rng.normal(0.0, 10.0, n)
    quantum = rng.lognormal(0.0, 1.0, n)
    # disjoint signatures: a column shared by two archetypes is diluted by scaling
    chosen = rng.choice(n, spec.size * spec.archetypes, replace=False)
    columns = tuple(tuple(sorted(block.tolist())) for block in chosen.reshape(spec.archetypes, spec.size))

    n_pos = int(np.floor(m * spec.defect_rate))
    pos_rows = np.sort(rng.choice(m, n_pos, replace=False))
    kind = np.full(m, -1, dtype=np.int64)
    assignment = np.arange(n_pos) % spec.archetypes
    rng.shuffle(assignment)
    kind[pos_rows] = assignment

    levels = np.rint(rng.normal(0.0, 1.0, (m, n)) * spec.noise_sigma)
    for a, cols in enumerate(columns):
        rows = np.flatnonzero(kind == a)
        levels[np.ix_(rows, cols)] += rng.uniform(spec.min_excess, spec.max_excess, (len(rows), len(cols)))
    values = nominal + quantum * levels
    labels = (kind >= 0).astype(np.uint8)
    names = [f"m{j:04d}" for j in range(n)]
    return SyntheticData(Dataset(values, labels, None, names), columns, kind)
