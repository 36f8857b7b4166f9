"""Training, evaluation and identification: the end-to-end classifier.

Training scales the full dataset, draws a training set T from the positive
objects only, scores every other object by its aggregate similarity to T and
picks a cutoff on those scores. Objects in T are never classified.
"""

from __future__ import annotations

import csv
import json
import logging
import math
import time
from dataclasses import dataclass, field, replace
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import cutoff as co
from .errors import ConfigError, DataError
from .ingest import Dataset
from .predicates import BitMatrix, IncidenceVector, PredicateConfig, encode_matrix
from .rng import shuffled
from .scale import ScalingParams, fit_scaling, scale_values
from .similarity import AGGREGATORS, SIMILARITIES, intersections, score_objects

log = logging.getLogger(__name__)

MODEL_FORMAT = "thresholdbits-model"
MODEL_VERSION = 1
CUTOFF_STRATEGIES = ("naive", "grid", "refined", "fixed")


@dataclass(frozen=True)
class RunConfig:
    p: float = 2.0
    seed: int = 1
    predicate: PredicateConfig = field(default_factory=PredicateConfig)
    similarity: str = "coincidence"
    agg: str = "max"
    cutoff: str = "grid"
    q_metric: str = "kappa"
    n_grid: int = 101
    n_steps: int = 10
    epsilon: float = 1e-6
    naive_mode: str = "half_difference"
    literal_walk: bool = False
    fixed_cutoff: float = 1.0
    threads: int = 1

    def __post_init__(self):
        if not 0 < self.p <= 100:
            raise ConfigError(f"training percentage p must be in (0, 100], got {self.p}")
        if self.similarity not in SIMILARITIES:
            raise ConfigError(f"unknown similarity {self.similarity!r}")
        if self.agg not in AGGREGATORS:
            raise ConfigError(f"unknown aggregator {self.agg!r}")
        if self.cutoff not in CUTOFF_STRATEGIES:
            raise ConfigError(f"unknown cutoff strategy {self.cutoff!r}")
        if self.q_metric not in co.METRICS:
            raise ConfigError(f"unknown quality metric {self.q_metric!r}")

    def with_(self, **changes) -> "RunConfig":
        return replace(self, **changes)


@dataclass(eq=False)
class TrainedModel:
    scaling: ScalingParams
    predicate: PredicateConfig
    similarity: str
    agg: str
    train_ids: np.ndarray
    train_vectors: BitMatrix
    cutoff: float
    inverted: bool
    av0: float
    av1: float
    cutoff_strategy: str = "grid"
    q_metric: str = "kappa"
    cutoff_result: co.CutoffResult | None = None

    def save(self, path) -> None:
        doc = {
            "format": MODEL_FORMAT,
            "version": MODEL_VERSION,
            "scaling": {"mu": self.scaling.mu.tolist(), "sigma": self.scaling.sigma.tolist()},
            "predicate": self.predicate.to_dict(),
            "similarity": self.similarity,
            "aggregator": self.agg,
            "cutoff": self.cutoff,
            "inverted": self.inverted,
            "av0": self.av0,
            "av1": self.av1,
            "cutoff_strategy": self.cutoff_strategy,
            "quality_metric": self.q_metric,
            "bits": self.train_vectors.size,
            "training_set": [
                {"id": int(i), "hex": self.train_vectors.row(k).to_hex()}
                for k, i in enumerate(self.train_ids)
            ],
        }
        Path(path).write_text(json.dumps(doc, indent=1) + "\n")

    @classmethod
    def load(cls, path) -> "TrainedModel":
        try:
            doc = json.loads(Path(path).read_text())
        except (OSError, ValueError) as exc:
            raise DataError(f"cannot read model {path}: {exc}") from exc
        if doc.get("format") != MODEL_FORMAT:
            raise DataError(f"{path} is not a {MODEL_FORMAT} file")
        if doc.get("version") != MODEL_VERSION:
            raise DataError(f"{path}: unsupported model version {doc.get('version')}")
        size = int(doc["bits"])
        rows = doc["training_set"]
        vectors = [IncidenceVector.from_hex(r["hex"], size) for r in rows]
        return cls(
            scaling=ScalingParams(doc["scaling"]["mu"], doc["scaling"]["sigma"]),
            predicate=PredicateConfig.from_dict(doc["predicate"]),
            similarity=doc["similarity"],
            agg=doc["aggregator"],
            train_ids=np.array([r["id"] for r in rows], dtype=np.int64),
            train_vectors=BitMatrix.from_vectors(vectors, size),
            cutoff=float(doc["cutoff"]),
            inverted=bool(doc["inverted"]),
            av0=float(doc["av0"]),
            av1=float(doc["av1"]),
            cutoff_strategy=doc.get("cutoff_strategy", "grid"),
            q_metric=doc.get("quality_metric", "kappa"),
        )


@dataclass(eq=False)
class RunReport:
    ids: np.ndarray
    scores: np.ndarray
    predictions: np.ndarray
    truth: np.ndarray
    winners: np.ndarray  # id of the training object attaining each score
    confusion: co.Confusion
    accuracy: float
    kappa: float
    tp_fp_ratio: float
    av0: float
    av1: float
    q_avg_ratio: float
    cutoff: float
    inverted: bool
    seconds: float = 0.0

    @property
    def objects_per_second(self) -> float:
        return len(self.ids) / self.seconds if self.seconds > 0 else math.inf

    def summary_row(self) -> dict:
        c = self.confusion
        return {
            "classified": len(self.ids), "accuracy": self.accuracy, "kappa": self.kappa,
            "tp": c.tp, "fp": c.fp, "tn": c.tn, "fn": c.fn, "tp_fp": self.tp_fp_ratio,
            "av0": self.av0, "av1": self.av1, "q_avg": self.q_avg_ratio,
            "cutoff": self.cutoff, "inverted": int(self.inverted),
        }

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["id", "score", "prediction", "truth", "winner"])
            for row in zip(self.ids, self.scores, self.predictions, self.truth, self.winners):
                w.writerow([int(row[0]), repr(float(row[1])), int(row[2]), int(row[3]), int(row[4])])

    def table(self) -> str:
        c = self.confusion
        lines = [
            f"{'classified':<12}{len(self.ids):>10}",
            f"{'accuracy':<12}{self.accuracy:>10.3f}",
            f"{'kappa':<12}{self.kappa:>10.3f}",
            f"{'TP':<12}{c.tp:>10}",
            f"{'FP':<12}{c.fp:>10}",
            f"{'TN':<12}{c.tn:>10}",
            f"{'FN':<12}{c.fn:>10}",
            f"{'TP/FP':<12}{format_ratio(self.tp_fp_ratio):>10}",
            f"{'Av1':<12}{self.av1:>10.4f}",
            f"{'Av0':<12}{self.av0:>10.4f}",
            f"{'Q_avg':<12}{format_ratio(self.q_avg_ratio, 3):>10}",
            f"{'cutoff':<12}{self.cutoff:>10.4f}",
        ]
        if self.inverted:
            lines.append("predictions inverted (Av1 < Av0): training set looks insufficient")
        return "\n".join(lines)


def ratio(num: float, den: float) -> float:
    """num/den with +inf for x/0 (x > 0) and nan for 0/0."""
    if den == 0:
        return math.inf if num > 0 else math.nan
    return num / den


def format_ratio(value: float, digits: int = 1) -> str:
    if math.isinf(value):
        return "inf"
    if math.isnan(value):
        return "n/a"
    return f"{value:.{digits}f}"


def metrics_from_counts(c: co.Confusion) -> dict:
    return {
        "accuracy": co.accuracy_from_counts(c),
        "kappa": co.kappa_from_counts(c),
        "tp_fp": ratio(c.tp, c.fp),
    }


def training_size(n_positive: int, p: float) -> int:
    return math.ceil(n_positive * Fraction(str(p)) / 100)


def select_training(d: Dataset, p: float, seed: int) -> list[int]:
    """Ids of ceil(|D1| * p / 100) positive objects drawn without repetition.

    Positives are shuffled in dataset order with the seeded stream and the
    first k are kept; the result is returned in dataset order.
    """
    if not 0 < p <= 100:
        raise ConfigError(f"training percentage p must be in (0, 100], got {p}")
    pos = d.positives
    if len(pos) == 0:
        raise DataError("no positive objects to train on")
    k = training_size(len(pos), p)
    rows = sorted(shuffled(pos.tolist(), seed)[:k])
    return [int(d.ids[r]) for r in rows]


def _mean(x: np.ndarray) -> float:
    return float(x.mean()) if len(x) else math.nan


@dataclass
class _Fit:
    model: TrainedModel
    rest: np.ndarray
    scores: np.ndarray
    winners: np.ndarray
    seconds: float


def _fit(d: Dataset, cfg: RunConfig) -> _Fit:
    if d.n == 0:
        raise DataError("dataset has no measurement columns")
    scaling = fit_scaling(d)
    bits = encode_matrix(scale_values(d.values, scaling), cfg.predicate)
    train_ids = np.array(select_training(d, cfg.p, cfg.seed), dtype=np.int64)
    in_train = np.isin(d.ids, train_ids)
    train_rows = np.flatnonzero(in_train)
    rest = np.flatnonzero(~in_train)
    T = bits.take(train_rows)

    t0 = time.perf_counter()
    res = score_objects(bits.take(rest), T, cfg.similarity, cfg.agg, cfg.threads)
    seconds = time.perf_counter() - t0
    truth = d.labels[rest].astype(bool)

    av0 = _mean(res.scores[~truth])
    av1 = _mean(res.scores[truth])
    if not truth.any():
        # every positive is in T; fall back to the training objects' own scores
        av1 = _mean(score_objects(T, T, cfg.similarity, cfg.agg).scores)
    if math.isnan(av0):
        raise DataError("no negative objects outside the training set")

    inverted = False
    result = None
    if cfg.cutoff == "fixed":
        c = cfg.fixed_cutoff
    else:
        inverted = av1 - av0 < 0
        if inverted:
            log.warning("Av1 < Av0: inverting predictions; the training set looks insufficient")
        if cfg.cutoff == "naive":
            c = co.naive_cutoff(max(av1, av0), min(av1, av0), cfg.naive_mode)
        else:
            sv = co.ScoreVector(res.scores, truth, inverted)
            if cfg.cutoff == "grid":
                result = co.grid_cutoff(sv, cfg.q_metric, cfg.n_grid)
            else:
                result = co.refined_cutoff(sv, cfg.q_metric, cfg.n_steps, cfg.epsilon,
                                           literal=cfg.literal_walk)
            c = result.c_opt
        c = float(np.clip(c, 0.0, 1.0))

    model = TrainedModel(
        scaling=scaling, predicate=cfg.predicate, similarity=cfg.similarity, agg=cfg.agg,
        train_ids=train_ids, train_vectors=T, cutoff=c, inverted=inverted, av0=av0, av1=av1,
        cutoff_strategy=cfg.cutoff, q_metric=cfg.q_metric, cutoff_result=result,
    )
    return _Fit(model, rest, res.scores, train_ids[res.winners], seconds)


def train(d: Dataset, cfg: RunConfig) -> TrainedModel:
    return _fit(d, cfg).model


def _report(ids, scores, winners, truth, model: TrainedModel, seconds: float) -> RunReport:
    truth = np.asarray(truth).astype(np.uint8)
    pred = co.predict(scores, model.cutoff, model.inverted)
    c = co.confusion(pred, truth)
    pos = truth.astype(bool)
    av1, av0 = _mean(scores[pos]), _mean(scores[~pos])
    return RunReport(
        ids=np.asarray(ids), scores=scores, predictions=pred, truth=truth, winners=winners,
        confusion=c, accuracy=co.accuracy_from_counts(c) if c.total else math.nan,
        kappa=co.kappa_from_counts(c) if c.total else math.nan,
        tp_fp_ratio=ratio(c.tp, c.fp), av0=av0, av1=av1,
        q_avg_ratio=ratio(av1, av0) if not (math.isnan(av1) or math.isnan(av0)) else math.nan,
        cutoff=model.cutoff, inverted=model.inverted, seconds=seconds,
    )


def score(d: Dataset, model: TrainedModel, threads: int = 1):
    """Scores and winners for the objects of d that are not in the training set."""
    if d.n != model.scaling.n:
        raise DataError(f"dataset has {d.n} columns, model expects {model.scaling.n}")
    rest = np.flatnonzero(~np.isin(d.ids, model.train_ids))
    bits = encode_matrix(scale_values(d.values[rest], model.scaling), model.predicate)
    t0 = time.perf_counter()
    res = score_objects(bits, model.train_vectors, model.similarity, model.agg, threads)
    seconds = time.perf_counter() - t0
    return rest, res.scores, model.train_ids[res.winners], seconds


def evaluate(d: Dataset, model: TrainedModel, threads: int = 1) -> RunReport:
    rest, scores, winners, seconds = score(d, model, threads)
    return _report(d.ids[rest], scores, winners, d.labels[rest], model, seconds)


def run(d: Dataset, cfg: RunConfig) -> tuple[TrainedModel, RunReport]:
    """Train and evaluate on the same dataset, scoring each object once."""
    fit = _fit(d, cfg)
    report = _report(d.ids[fit.rest], fit.scores, fit.winners, d.labels[fit.rest], fit.model, fit.seconds)
    return fit.model, report


@dataclass(eq=False)
class Identification:
    ids: np.ndarray       # objects tested (all negatives of the dataset)
    positive: np.ndarray  # 1 where some positive object's excesses contain the object's excesses
    witness: np.ndarray   # id of the first such positive object, -1 if none


def identify(d: Dataset, predicate: PredicateConfig, threads: int = 1) -> Identification:
    """Exact identification against all positive objects (T = D1, C = 1).

    x is flagged when it has at least one excess and some positive y has
    every excess of x as well.
    """
    pos = d.positives
    if len(pos) == 0:
        raise DataError("no positive objects")
    scaling = fit_scaling(d)
    bits = encode_matrix(scale_values(d.values, scaling), predicate)
    rest = np.flatnonzero(d.labels == 0)
    X, T = bits.take(rest), bits.take(pos)
    contained = intersections(X, T, threads) == X.weights[:, None]
    contained &= X.weights[:, None] > 0
    hit = contained.any(axis=1)
    first = contained.argmax(axis=1)
    witness = np.where(hit, d.ids[pos][first], -1)
    return Identification(d.ids[rest], hit.astype(np.uint8), witness)
