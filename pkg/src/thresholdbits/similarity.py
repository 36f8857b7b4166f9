"""Similarity of incidence vectors and aggregation over a training set.

Every similarity here is a function of four exact integers: the vector
length s, the two Hamming weights and the weight of the intersection. The
batch kernel computes the intersection weights for all (object, training
object) pairs with packed AND + popcount, then evaluates the chosen formula
elementwise. Adding a similarity means adding one entry to ``_FORMULAS``.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import NamedTuple, Sequence

import numpy as np

from .errors import ConfigError, DataError
from .predicates import BitMatrix, IncidenceVector, _check_len, popcount

SIMILARITIES = ("coincidence", "kappa", "cosine")
AGGREGATORS = ("max", "min")

# words * rows per chunk; bounds the temporary (rows, |T|, words) array
_CHUNK_WORDS = 1 << 22


def _coincidence(inter, hx, hy, s):
    return np.divide(inter, hx, out=np.zeros(np.broadcast(inter, hx).shape), where=hx > 0)


def _cosine(inter, hx, hy, s):
    denom = np.sqrt(hx.astype(np.float64) * hy)
    return np.divide(inter, denom, out=np.zeros(np.broadcast(inter, denom).shape), where=denom > 0)


def _kappa(inter, hx, hy, s):
    # kappa = (s*agree - E) / (s^2 - E) with E = s^2 * p_e, all integers
    inter, hx, hy = np.broadcast_arrays(np.asarray(inter, np.int64), np.asarray(hx, np.int64), np.asarray(hy, np.int64))
    agree = s - (hx + hy - 2 * inter)
    expected = (s - hx) * (s - hy) + hx * hy
    num = s * agree - expected
    den = s * s - expected
    out = np.divide(num, den, out=np.zeros(num.shape), where=den != 0)
    degenerate = den == 0
    out[degenerate & (agree == s)] = 1.0
    return out


def _complement(inter, hx, hy, s):
    both_clear = s - hx - hy + inter
    free = s - hx
    return np.divide(both_clear, free, out=np.zeros(np.broadcast(both_clear, free).shape), where=free > 0)


_FORMULAS = {
    "coincidence": _coincidence,
    "kappa": _kappa,
    "cosine": _cosine,
    "complement": _complement,
}


def _pair(x: IncidenceVector, y: IncidenceVector, kind: str) -> float:
    _check_len(x, y)
    inter = int(popcount(x.words & y.words).sum())
    return float(_FORMULAS[kind](np.int64(inter), np.int64(x.weight), np.int64(y.weight), x.size))


def coincidence(x: IncidenceVector, y: IncidenceVector) -> float:
    """H(x AND y) / H(x); 0 when x has no bits set. Not symmetric."""
    return _pair(x, y, "coincidence")


def kappa_bits(x: IncidenceVector, y: IncidenceVector) -> float:
    """Cohen's kappa between two bit vectors read as binary raters.

    When chance agreement is 1 (both vectors constant) kappa is 1 for equal
    vectors and 0 otherwise.
    """
    if x.size == 0:
        raise DataError("kappa needs vectors of length >= 1")
    return _pair(x, y, "kappa")


def cosine(x: IncidenceVector, y: IncidenceVector) -> float:
    return _pair(x, y, "cosine")


def intersections(X: BitMatrix, T: BitMatrix, threads: int | None = 1) -> np.ndarray:
    """(len(X), len(T)) matrix of H(x AND y) counts."""
    if X.size != T.size:
        raise DataError(f"bit lengths differ ({X.size} vs {T.size})")
    m, k = len(X), len(T)
    out = np.zeros((m, k), dtype=np.int64)
    if m == 0 or k == 0:
        return out
    w = max(X.words.shape[1], 1)
    step = max(1, _CHUNK_WORDS // (k * w))
    starts = range(0, m, step)

    def work(a):
        block = X.words[a:a + step, None, :] & T.words[None, :, :]
        out[a:a + step] = popcount(block).sum(axis=-1, dtype=np.int64)

    threads = threads or os.cpu_count() or 1
    if threads <= 1 or len(starts) == 1:
        for a in starts:
            work(a)
    else:
        with ThreadPoolExecutor(threads) as pool:
            list(pool.map(work, starts))
    return out


def similarity_matrix(X: BitMatrix, T: BitMatrix, kind: str = "coincidence", threads: int | None = 1) -> np.ndarray:
    if kind not in _FORMULAS:
        raise ConfigError(f"unknown similarity {kind!r}; expected one of {SIMILARITIES}")
    inter = intersections(X, T, threads)
    return _FORMULAS[kind](inter, X.weights[:, None], T.weights[None, :], X.size)


class Aggregate(NamedTuple):
    scores: np.ndarray   # aggregate score per object
    winners: np.ndarray  # index into T of the first training object attaining it


def aggregate(sim: np.ndarray, agg: str = "max") -> Aggregate:
    """Reduce an (objects, T) similarity matrix row-wise; ties go to the first column."""
    if agg not in AGGREGATORS:
        raise ConfigError(f"unknown aggregator {agg!r}; expected one of {AGGREGATORS}")
    if sim.shape[1] == 0:
        raise DataError("training set is empty")
    idx = sim.argmax(axis=1) if agg == "max" else sim.argmin(axis=1)
    return Aggregate(sim[np.arange(sim.shape[0]), idx], idx)


def score_objects(X: BitMatrix, T: BitMatrix, kind: str = "coincidence", agg: str = "max",
                  threads: int | None = 1) -> Aggregate:
    if len(T) == 0:
        raise DataError("training set is empty")
    return aggregate(similarity_matrix(X, T, kind, threads), agg)


def s_to_set(x: IncidenceVector, T: Sequence[IncidenceVector], f: str = "coincidence",
             agg: str = "max") -> tuple[float, int]:
    """Aggregate similarity of x to the training vectors, plus the winning index."""
    if len(T) == 0:
        raise DataError("training set is empty")
    res = score_objects(BitMatrix.from_vectors([x]), BitMatrix.from_vectors(list(T)), f, agg)
    return float(res.scores[0]), int(res.winners[0])


def s2_to_set(x: IncidenceVector, T2: Sequence[IncidenceVector]) -> float:
    """Max over T2 of H(NOT x AND NOT y) / H(NOT x): similarity in *not* exceeding."""
    if len(T2) == 0:
        raise DataError("negative training set is empty")
    res = score_objects(BitMatrix.from_vectors([x]), BitMatrix.from_vectors(list(T2)), "complement", "max")
    return float(res.scores[0])
