"""Parameter sweeps over threshold, training percentage and seed.

Every cell of the t x p x seed grid is one pipeline run. Outputs go to a
directory:

    summary.csv                 one row per cell
    seeds.csv                   min/median/max kappa over seeds per (t, p)
    cells/<cell>.csv            per-object report of each cell
    curves/scores_<cell>.csv    scores, positives first, each class in descending order
    curves/kappa_cutoff_<cell>.csv
    curves/kappa_qavg_vs_t_p<p>.csv   median over seeds
    curves/tp_fp_vs_t_p<p>.csv        median over seeds
    manifest.json               timestamps, per-cell status and errors

Everything except the manifest is byte-identical across repeated runs.
"""

from __future__ import annotations

import csv
import json
import logging
import math
import statistics
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from pathlib import Path
from typing import Sequence

import numpy as np

from . import cutoff as co
from .errors import ConfigError, ThresholdBitsError
from .ingest import Dataset
from .pipeline import RunConfig, RunReport, format_ratio, run

log = logging.getLogger(__name__)

SUMMARY_FIELDS = ["t", "p", "seed", "train", "classified", "accuracy", "kappa",
                  "tp", "fp", "tn", "fn", "tp_fp", "av1", "av0", "q_avg", "cutoff", "inverted"]


@dataclass(frozen=True)
class ExperimentSpec:
    dataset: Dataset
    out_dir: Path
    base: RunConfig = field(default_factory=RunConfig)
    t_values: Sequence[float] | None = None  # None keeps the base predicate threshold
    p_values: Sequence[float] | None = None
    seeds: Sequence[int] | None = None
    curve_points: int = 101

    def __post_init__(self):
        for name in ("t_values", "p_values", "seeds"):
            v = getattr(self, name)
            if v is not None and len(v) == 0:
                raise ConfigError(f"sweep axis {name} is empty")
        if self.t_values is not None and self.base.predicate.kind == "ref_excess":
            raise ConfigError("a threshold sweep needs a t_excess or abs_t_excess predicate")
        if self.curve_points < 2:
            raise ConfigError("curve_points must be >= 2")

    def axes(self) -> tuple[list[float], list[float], list[int]]:
        ts = list(self.t_values) if self.t_values is not None else [self.base.predicate.t]
        ps = list(self.p_values) if self.p_values is not None else [self.base.p]
        seeds = list(self.seeds) if self.seeds is not None else [self.base.seed]
        return ts, ps, seeds


@dataclass
class CellResult:
    t: float
    p: float
    seed: int
    report: RunReport | None
    train_size: int = 0
    error: str | None = None


def float_range(start: float, stop: float, step: float) -> list[float]:
    """Inclusive range with values rounded to 12 digits, so 0.1..1.0 step 0.1 has 10 points."""
    if step <= 0 or stop < start:
        raise ConfigError(f"bad range {start}..{stop} step {step}")
    n = int(math.floor((stop - start) / step + 1e-9)) + 1
    return [round(start + k * step, 12) for k in range(n)]


def cell_name(t: float, p: float, seed: int) -> str:
    return f"t{t:g}_p{p:g}_s{seed}"


def _num(x: float) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return repr(x)


def _write_rows(path: Path, header: list[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_num(v) if not isinstance(v, str) else v for v in r])


def summary_row(cell: CellResult) -> list:
    r = cell.report
    c = r.confusion
    return [cell.t, cell.p, cell.seed, cell.train_size, len(r.ids), r.accuracy, r.kappa,
            c.tp, c.fp, c.tn, c.fn, r.tp_fp_ratio, r.av1, r.av0, r.q_avg_ratio, r.cutoff, int(r.inverted)]


def score_curve(report: RunReport) -> list[tuple[int, float]]:
    """Scores with all positive objects first, each class in descending score order."""
    order = np.lexsort((-report.scores, 1 - report.truth.astype(np.int64)))
    return [(k, float(report.scores[i])) for k, i in enumerate(order)]


def kappa_curve(report: RunReport, points: int = 101) -> list[tuple[float, float]]:
    sv = co.ScoreVector(report.scores, report.truth, report.inverted)
    return [(float(c), sv.quality(float(c), "kappa")) for c in np.linspace(0.0, 1.0, points)]


def _median(values: list[float]) -> float:
    finite = [v for v in values if not math.isnan(v)]
    return statistics.median(finite) if finite else math.nan


def seed_stats(cells: list[CellResult]) -> list[list]:
    """Per (t, p): seeds run, min/median/max kappa and the seed attaining the max."""
    groups: dict[tuple[float, float], list[CellResult]] = {}
    for c in cells:
        if c.report is not None:
            groups.setdefault((c.t, c.p), []).append(c)
    rows = []
    for (t, p), group in groups.items():
        kappas = [c.report.kappa for c in group]
        best = max(group, key=lambda c: (c.report.kappa, -c.seed))
        rows.append([t, p, len(group), min(kappas), _median(kappas), max(kappas), best.seed])
    return rows


def run_experiment(spec: ExperimentSpec) -> list[CellResult]:
    """Run every cell, writing outputs as they complete.

    A cell that fails with a data or config error is recorded in the
    manifest and the sweep continues, so partial results survive.
    """
    out = Path(spec.out_dir)
    (out / "cells").mkdir(parents=True, exist_ok=True)
    (out / "curves").mkdir(exist_ok=True)
    ts, ps, seeds = spec.axes()
    manifest = {"started": datetime.now(timezone.utc).isoformat(), "cells": [], "finished": None}
    cells: list[CellResult] = []

    def flush_manifest():
        (out / "manifest.json").write_text(json.dumps(manifest, indent=1) + "\n")

    try:
        for p in ps:
            for t in ts:
                pred = replace(spec.base.predicate, t=t) if spec.t_values is not None else spec.base.predicate
                for seed in seeds:
                    name = cell_name(t, p, seed)
                    try:
                        cfg = spec.base.with_(p=p, seed=seed, predicate=pred)
                        model, report = run(spec.dataset, cfg)
                    except ThresholdBitsError as exc:
                        log.warning("cell %s failed: %s", name, exc)
                        cells.append(CellResult(t, p, seed, None, error=str(exc)))
                        manifest["cells"].append({"cell": name, "status": "error", "error": str(exc)})
                        flush_manifest()
                        continue
                    cell = CellResult(t, p, seed, report, len(model.train_ids))
                    cells.append(cell)
                    report.write_csv(out / "cells" / f"{name}.csv")
                    _write_rows(out / "curves" / f"scores_{name}.csv", ["object", "score"], score_curve(report))
                    _write_rows(out / "curves" / f"kappa_cutoff_{name}.csv", ["cutoff", "kappa"],
                                kappa_curve(report, spec.curve_points))
                    manifest["cells"].append({
                        "cell": name, "status": "ok", "kappa": report.kappa,
                        "tp_fp": format_ratio(report.tp_fp_ratio), "seconds": report.seconds,
                    })
                    flush_manifest()
    finally:
        ok = [c for c in cells if c.report is not None]
        _write_rows(out / "summary.csv", SUMMARY_FIELDS, [summary_row(c) for c in ok])
        _write_rows(out / "seeds.csv", ["t", "p", "seeds", "kappa_min", "kappa_median", "kappa_max", "best_seed"],
                    seed_stats(cells))
        for p in ps:
            by_t = [[c for c in ok if c.p == p and c.t == t] for t in ts]
            rows = [(t, _median([c.report.kappa for c in g]), _median([c.report.q_avg_ratio for c in g]))
                    for t, g in zip(ts, by_t) if g]
            _write_rows(out / "curves" / f"kappa_qavg_vs_t_p{p:g}.csv", ["t", "kappa", "q_avg"], rows)
            rows = [(t, _median([c.report.tp_fp_ratio for c in g])) for t, g in zip(ts, by_t) if g]
            _write_rows(out / "curves" / f"tp_fp_vs_t_p{p:g}.csv", ["t", "tp_fp"], rows)
        manifest["finished"] = datetime.now(timezone.utc).isoformat()
        flush_manifest()
    return cells
