"""Digitizing scores with a cutoff and choosing that cutoff.

Quality of a cutoff c is Q(F(c), S): accuracy or Cohen's kappa between the
predictions ``score >= c`` and the truth bits. :class:`ScoreVector` sorts the
scores once so every Q evaluation is a binary search plus integer arithmetic.

:func:`grid_search` and :func:`refined_search` optimize any scalar objective
on [0, 1]; the ``*_cutoff`` wrappers bind them to a score vector.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np

from .errors import ConfigError, DataError

log = logging.getLogger(__name__)

METRICS = ("accuracy", "kappa")
MAX_WALK_ITERATIONS = 10_000


class Confusion(NamedTuple):
    tp: int
    fp: int
    tn: int
    fn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn


def confusion(pred, truth) -> Confusion:
    pred = np.asarray(pred, dtype=bool)
    truth = np.asarray(truth, dtype=bool)
    if pred.shape != truth.shape:
        raise DataError(f"prediction/truth length mismatch ({pred.shape} vs {truth.shape})")
    return Confusion(
        int(np.sum(pred & truth)), int(np.sum(pred & ~truth)),
        int(np.sum(~pred & ~truth)), int(np.sum(~pred & truth)),
    )


def accuracy_from_counts(c: Confusion) -> float:
    return (c.tp + c.tn) / c.total


def kappa_from_counts(c: Confusion) -> float:
    """Cohen's kappa; defined as 1 (perfect agreement) or 0 when chance agreement is 1."""
    n = c.total
    expected = (c.tn + c.fn) * (c.tn + c.fp) + (c.tp + c.fp) * (c.tp + c.fn)
    den = n * n - expected
    if den == 0:
        return 1.0 if c.fp + c.fn == 0 else 0.0
    return (n * (c.tp + c.tn) - expected) / den


_FROM_COUNTS = {"accuracy": accuracy_from_counts, "kappa": kappa_from_counts}


def _metric(q: str) -> Callable[[Confusion], float]:
    try:
        return _FROM_COUNTS[q]
    except KeyError:
        raise ConfigError(f"unknown quality metric {q!r}; expected one of {METRICS}") from None


def quality(pred, truth, q: str = "kappa") -> float:
    pred = np.asarray(pred)
    if pred.size == 0:
        raise DataError("quality needs at least one prediction")
    return _metric(q)(confusion(pred, truth))


def predict(scores, c: float, inverted: bool = False) -> np.ndarray:
    """1 where score >= c (or, inverted, where score < c)."""
    out = np.asarray(scores, dtype=np.float64) >= c
    return (~out if inverted else out).astype(np.uint8)


def naive_cutoff(av1: float, av0: float, mode: str = "half_difference") -> float:
    """Half the class-average difference (av1 - av0) / 2, or the midpoint (av1 + av0) / 2."""
    if mode == "half_difference":
        return (av1 - av0) / 2
    if mode == "midpoint":
        return (av1 + av0) / 2
    raise ConfigError(f"unknown naive cutoff mode {mode!r}")


class ScoreVector:
    """Scores of the classified objects with their truth bits."""

    def __init__(self, scores, truth, inverted: bool = False):
        scores = np.asarray(scores, dtype=np.float64)
        truth = np.asarray(truth).astype(bool)
        if scores.shape != truth.shape or scores.ndim != 1:
            raise DataError("scores and truth must be 1-d of equal length")
        if not np.isfinite(scores).all():
            raise DataError("scores must be finite")
        self.scores = scores
        self.truth = truth
        self.inverted = inverted
        order = np.argsort(scores, kind="stable")
        self._sorted = scores[order]
        self._pos_below = np.concatenate([[0], np.cumsum(truth[order])])
        self.n_pos = int(truth.sum())
        self.n = len(scores)

    def both_classes(self) -> bool:
        return 0 < self.n_pos < self.n

    def counts(self, c: float) -> Confusion:
        below = int(np.searchsorted(self._sorted, c, side="left"))
        pos_below = int(self._pos_below[below])
        pos_above = self.n_pos - pos_below
        neg_below = below - pos_below
        neg_above = self.n - below - pos_above
        if self.inverted:
            return Confusion(pos_below, neg_below, neg_above, pos_above)
        return Confusion(pos_above, neg_above, neg_below, pos_below)

    def quality(self, c: float, q: str = "kappa") -> float:
        return _metric(q)(self.counts(c))

    def predict(self, c: float) -> np.ndarray:
        return predict(self.scores, c, self.inverted)


@dataclass
class CutoffResult:
    c_opt: float
    q_opt: float
    curve: list[tuple[float, float]] = field(default_factory=list)
    evaluations: int = 0


def grid_search(objective: Callable[[float], float], n_grid: int) -> CutoffResult:
    """Evaluate the objective on {0, 1/(n_grid-1), ..., 1}; ties go to the smallest C."""
    if n_grid < 2:
        raise ConfigError("grid needs at least 2 points")
    curve = [(float(c), float(objective(c))) for c in np.linspace(0.0, 1.0, n_grid)]
    best = max(range(len(curve)), key=lambda i: (curve[i][1], -i))
    return CutoffResult(curve[best][0], curve[best][1], curve, len(curve))


def refined_search(objective: Callable[[float], float], n_steps: int = 10, epsilon: float = 1e-6,
                   max_iter: int = MAX_WALK_ITERATIONS, literal: bool = False) -> CutoffResult:
    """Coarse grid of ``n_steps`` cell centres, then a flexible-step walk.

    The walk starts at the left edge of the best coarse cell with step width
    1/100 of the cell. A non-decreasing step grows the step by 1.5; a
    decreasing step reverses it and halves it.

    Default mode: a worse trial point is discarded, so the next step starts
    from the better point; the walk stops after two successive changes
    below ``epsilon``; a position outside [0, 1] turns the step back with
    doubled width; the result is the best point seen inside [0, 1], coarse
    grid included.

    ``literal=True`` runs the plain walk: every trial point is
    adopted, one small change stops the walk, the doubling rules test the
    objective value for leaving [0, 1], and the last iterate is returned.
    Both modes stop after ``max_iter`` steps at the latest.
    """
    if n_steps < 1:
        raise ConfigError("n_steps must be >= 1")
    if not epsilon > 0:
        raise ConfigError("epsilon must be > 0")
    curve: list[tuple[float, float]] = []

    def evaluate(t):
        q = float(objective(t))
        curve.append((float(t), q))
        return q

    grid = [(k + 0.5) / n_steps for k in range(n_steps)]
    coarse = [evaluate(c) for c in grid]
    k_best = int(np.argmax(coarse))
    c_grid = grid[k_best]
    t_a = max(0.0, c_grid - 1 / (2 * n_steps))
    t_b = min(1.0, c_grid + 1 / (2 * n_steps))
    sw = (t_b - t_a) / 100

    t_prev, q_prev = t_a, evaluate(t_a)
    t_cur = t_a + sw
    q_cur = evaluate(t_cur)
    # a single tiny change can be a step straddling the peak at equal height
    quiet_needed = 1 if literal else 2
    quiet = 0
    for _ in range(max_iter):
        quiet = quiet + 1 if abs(q_cur - q_prev) < epsilon else 0
        if quiet >= quiet_needed:
            break
        if literal:
            if q_cur < 0:
                sw = abs(sw) * 2
            if q_cur > 1:
                sw = -abs(sw) * 2
        improved = q_cur >= q_prev
        sw = 1.5 * sw if improved else -sw / 2
        if literal or improved:
            t_prev, q_prev = t_cur, q_cur
        # otherwise the trial point is discarded and the walk turns back from t_prev
        if not literal:
            # applied after the hill-climbing rule so that rule cannot undo it
            if t_prev < 0:
                sw = abs(sw) * 2
            elif t_prev > 1:
                sw = -abs(sw) * 2
        t_cur = t_prev + sw
        q_cur = evaluate(t_cur)
    else:
        log.warning("cutoff walk hit the iteration cap (%d)", max_iter)

    if literal:
        return CutoffResult(t_cur, q_cur, curve, len(curve))
    inside = [(c, q) for c, q in curve if 0.0 <= c <= 1.0]
    best = max(range(len(inside)), key=lambda i: (inside[i][1], -inside[i][0]))
    return CutoffResult(inside[best][0], inside[best][1], curve, len(curve))


def _require_both(sv: ScoreVector) -> None:
    if not sv.both_classes():
        raise DataError("cutoff optimization needs both positive and negative objects")


def grid_cutoff(scores: ScoreVector, q: str = "kappa", n_grid: int = 101) -> CutoffResult:
    _require_both(scores)
    _metric(q)
    return grid_search(lambda c: scores.quality(c, q), n_grid)


def refined_cutoff(scores: ScoreVector, q: str = "kappa", n_steps: int = 10, epsilon: float = 1e-6,
                   max_iter: int = MAX_WALK_ITERATIONS, literal: bool = False) -> CutoffResult:
    _require_both(scores)
    _metric(q)
    return refined_search(lambda c: scores.quality(c, q), n_steps, epsilon, max_iter, literal)
