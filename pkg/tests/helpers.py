"""Shared test fixtures that are not pytest fixtures."""

import numpy as np


def random_hill(rng: np.random.Generator):
    """Knots of a strictly unimodal piecewise-linear curve on [0, 1], values in kappa's range."""
    peak_x = rng.uniform(0.02, 0.98)
    peak_q = rng.uniform(0.2, 1.0)
    left = np.sort(rng.uniform(0, peak_x, rng.integers(1, 6)))
    right = np.sort(rng.uniform(peak_x, 1, rng.integers(1, 6)))
    xs = np.concatenate([[0.0], left, [peak_x], right, [1.0]])
    xs = np.unique(xs)
    lq = np.sort(rng.uniform(-0.3, peak_q, int((xs < peak_x).sum())))
    rq = np.sort(rng.uniform(-0.3, peak_q, int((xs > peak_x).sum())))[::-1]
    ys = np.concatenate([lq, [peak_q], rq])
    # strictness: nudge equal neighbours apart
    for i in range(1, len(ys)):
        if xs[i] <= peak_x and ys[i] <= ys[i - 1]:
            ys[i] = ys[i - 1] + 1e-9
    for i in range(len(ys) - 2, -1, -1):
        if xs[i] >= peak_x and ys[i] <= ys[i + 1]:
            ys[i] = ys[i + 1] + 1e-9
    return xs, ys


def hill_objective(xs, ys):
    return lambda c: float(np.interp(c, xs, ys))


def dense_oracle(xs, ys, points: int = 100_001):
    grid = np.linspace(0.0, 1.0, points)
    vals = np.interp(grid, xs, ys)
    return float(vals.max()), points
