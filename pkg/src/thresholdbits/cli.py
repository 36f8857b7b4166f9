"""Batch command line: one subcommand per pipeline stage.

Exit codes: 0 success, 1 data error, 2 config error, 3 internal error.
Options may also come from a ``key = value`` file given with --config;
command-line flags override it and it overrides the defaults.
"""

from __future__ import annotations

import argparse
import csv
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .datasets import IRIS_SPECIES, iris
from .dimreduce import apply_reduction, plan_reduction
from .errors import ConfigError, DataError, ThresholdBitsError
from .experiment import ExperimentSpec, float_range, run_experiment
from .histogram import gini, prototype_histogram
from .ingest import ColumnSelection, Dataset, load_csv, select_columns, write_csv
from .pipeline import RunConfig, TrainedModel, evaluate, identify, run, score
from .plot import emit_plot
from .predicates import PredicateConfig, encode_matrix
from .prologgen import build_system, emit_prolog, solve
from .scale import autoscale, fit_scaling, save_scaling, scale_values
from .synthetic import SyntheticSpec, gen_synthetic

log = logging.getLogger("thresholdbits")

PREDICATE_KINDS = {"t": "t_excess", "abs": "abs_t_excess", "ref": "ref_excess"}


def _int_list(text: str) -> list[int]:
    """'1..20' or '1,2,5'."""
    text = text.strip()
    if ".." in text:
        a, b = text.split("..", 1)
        a, b = int(a), int(b)
        if b < a:
            raise ValueError(f"empty range {text}")
        return list(range(a, b + 1))
    return [int(x) for x in text.split(",") if x.strip()]


def _float_list(text: str) -> list[float]:
    """'0.1:1.0:0.1' (inclusive start:stop:step) or '0.1,0.5'."""
    if ":" in text:
        parts = [float(x) for x in text.split(":")]
        if len(parts) != 3:
            raise ValueError("range needs start:stop:step")
        return float_range(*parts)
    return [float(x) for x in text.split(",") if x.strip()]


def _label_col(text: str):
    return None if text.lower() == "none" else text


def _bool(text: str) -> bool:
    low = str(text).strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


# name -> (type, default); these may be set in the config file
OPTIONS = {
    "label_col": (_label_col, "0"),
    "id_col": (str, None),
    "columns": (str, "all"),
    "predicate": (str, "abs"),
    "t": (float, 0.5),
    "ref_file": (str, None),
    "similarity": (str, "coincidence"),
    "agg": (str, "max"),
    "cutoff": (str, "grid"),
    "q": (str, "kappa"),
    "grid": (int, 101),
    "n_steps": (int, 10),
    "epsilon": (float, 1e-6),
    "naive_mode": (str, "half_difference"),
    "literal_walk": (_bool, False),
    "p": (float, 2.0),
    "seed": (int, 1),
    "threads": (int, None),  # None: logical cores
    "reduce_sharpness": (int, 1),
    "t_values": (_float_list, None),
    "p_values": (_float_list, None),
    "seeds": (_int_list, None),
}


def read_config(path) -> dict:
    """Parse ``key = value`` lines; '#' starts a comment, [sections] are ignored."""
    out = {}
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    for n, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line or (line.startswith("[") and line.endswith("]")):
            continue
        if "=" not in line:
            raise ConfigError(f"{path} line {n}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in OPTIONS:
            raise ConfigError(f"{path} line {n}: unknown key {key!r}")
        if len(value) >= 2 and value[0] == value[-1] and value[0] in "\"'":
            value = value[1:-1]
        try:
            out[key] = OPTIONS[key][0](value)
        except ValueError as exc:
            raise ConfigError(f"{path} line {n}: bad value for {key}: {exc}") from None
    return out


def resolve_options(args: argparse.Namespace) -> argparse.Namespace:
    """Fill unset options from the config file, then from the defaults."""
    config = read_config(args.config) if getattr(args, "config", None) else {}
    for key, (conv, default) in OPTIONS.items():
        if hasattr(args, key) and getattr(args, key) is None:
            value = config.get(key, default)
            setattr(args, key, conv(value) if isinstance(value, str) and conv is not str else value)
    if getattr(args, "threads", 1) is None:
        args.threads = os.cpu_count() or 1
    return args


# ---- argument groups

def _add_input(p: argparse.ArgumentParser, labels: bool = True) -> None:
    p.add_argument("--input", required=True, help="CSV/TSV data file")
    if labels:
        p.add_argument("--label-col", type=_label_col, help="label column name or index (default 0)")
    p.add_argument("--id-col", help="object id column name or index (default: row number)")
    p.add_argument("--columns", help="measurement columns: all, a..b or a,b,c (0-based)")


def _add_predicate(p: argparse.ArgumentParser) -> None:
    p.add_argument("--predicate", choices=sorted(PREDICATE_KINDS))
    p.add_argument("--t", type=float, help="threshold for t/abs predicates")
    p.add_argument("--ref-file", help="CSV with lo,hi per column (scaled units) for --predicate ref")


def _add_run(p: argparse.ArgumentParser) -> None:
    _add_predicate(p)
    p.add_argument("--p", type=float, help="percentage of positive objects used for training")
    p.add_argument("--seed", type=int)
    p.add_argument("--similarity", choices=["coincidence", "kappa", "cosine"])
    p.add_argument("--agg", choices=["max", "min"])
    p.add_argument("--cutoff", choices=["naive", "grid", "refined"])
    p.add_argument("--q", choices=["accuracy", "kappa"], help="quality metric the cutoff maximizes")
    p.add_argument("--grid", type=int, help="grid points in [0,1] for --cutoff grid")
    p.add_argument("--n-steps", type=int, help="coarse grid size for --cutoff refined")
    p.add_argument("--epsilon", type=float, help="stop tolerance for --cutoff refined")
    p.add_argument("--naive-mode", choices=["half_difference", "midpoint"])
    p.add_argument("--literal-walk", action="store_const", const=True, default=None,
                   help="refined walk without the accept/reject step")


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="key = value file of option defaults")
    p.add_argument("--threads", type=int, help="scoring threads (default: logical cores)")


# ---- shared helpers

def load_input(args, labels: bool = True) -> Dataset:
    d = load_csv(args.input, args.label_col if labels else None, args.id_col)
    return select_columns(d, ColumnSelection.parse(args.columns))


def predicate_from(args) -> PredicateConfig:
    if args.predicate not in PREDICATE_KINDS:
        raise ConfigError(f"unknown predicate {args.predicate!r}; expected one of {sorted(PREDICATE_KINDS)}")
    kind = PREDICATE_KINDS[args.predicate]
    if kind != "ref_excess":
        return PredicateConfig(kind, t=args.t)
    if not args.ref_file:
        raise ConfigError("--predicate ref needs --ref-file")
    try:
        with open(args.ref_file, newline="") as fh:
            rows = [r for r in csv.reader(fh) if r]
    except OSError as exc:
        raise DataError(f"cannot read {args.ref_file}: {exc}") from exc
    if rows and not all(_is_float(c) for c in rows[0]):
        rows = rows[1:]
    try:
        lo = tuple(float(r[-2]) for r in rows)
        hi = tuple(float(r[-1]) for r in rows)
    except (ValueError, IndexError):
        raise DataError(f"{args.ref_file}: expected lo,hi per line") from None
    return PredicateConfig(kind, lo=lo, hi=hi)


def _is_float(text: str) -> bool:
    try:
        float(text)
    except ValueError:
        return False
    return True


def run_config(args) -> RunConfig:
    return RunConfig(
        p=args.p, seed=args.seed, predicate=predicate_from(args), similarity=args.similarity,
        agg=args.agg, cutoff=args.cutoff, q_metric=args.q, n_grid=args.grid, n_steps=args.n_steps,
        epsilon=args.epsilon, naive_mode=args.naive_mode, literal_walk=args.literal_walk,
        threads=args.threads,
    )


def write_curve(result, path) -> None:
    if result is None:
        raise ConfigError("no cutoff curve: the naive cutoff evaluates no curve")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["C", "Q"])
        for c, q in result.curve:
            w.writerow([repr(float(c)), repr(float(q))])


# ---- subcommands

def cmd_ingest_check(args) -> int:
    d = load_input(args)
    print(f"objects    {d.m}")
    print(f"columns    {d.n}")
    print(f"positives  {len(d.positives)}")
    print(f"negatives  {d.m - len(d.positives)}")
    const = int(np.sum(fit_scaling(d).sigma == 0)) if d.m else 0
    print(f"constant columns  {const}")
    return 0


def cmd_scale(args) -> int:
    d = load_input(args)
    scaled, params = autoscale(d)
    write_csv(scaled, args.out)
    if args.params_out:
        save_scaling(params, args.params_out)
    return 0


def cmd_reduce(args) -> int:
    d = load_input(args)
    scaled, _ = autoscale(d)
    plan = plan_reduction(scaled, args.reduce_sharpness)
    if args.plan_out:
        plan.write_csv(args.plan_out)
    if args.out:
        write_csv(apply_reduction(scaled, plan), args.out)
    print(f"kept {plan.n_kept} of {plan.n} columns, omitted {plan.percent_omitted:.1f}%")
    return 0


def cmd_train(args) -> int:
    d = load_input(args)
    model, report = run(d, run_config(args))
    model.save(args.model_out)
    if args.curve_out:
        write_curve(model.cutoff_result, args.curve_out)
    if args.report_out:
        report.write_csv(args.report_out)
    print(f"training set  {len(model.train_ids)} objects")
    print(report.table())
    return 0


def cmd_predict(args) -> int:
    model = TrainedModel.load(args.model)
    d = load_input(args, labels=False)
    rest, scores, winners, _ = score(d, model, args.threads)
    pred = (scores < model.cutoff) if model.inverted else (scores >= model.cutoff)
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["id", "score", "prediction", "winner"])
        for i, s, p, y in zip(d.ids[rest], scores, pred, winners):
            w.writerow([int(i), repr(float(s)), int(p), int(y)])
    print(f"predicted {len(rest)} objects, {int(pred.sum())} positive")
    return 0


def cmd_evaluate(args) -> int:
    model = TrainedModel.load(args.model)
    report = evaluate(load_input(args), model, args.threads)
    if args.report_out:
        report.write_csv(args.report_out)
    print(report.table())
    return 0


def cmd_identify(args) -> int:
    d = load_input(args)
    res = identify(d, predicate_from(args), args.threads)
    if args.out:
        with open(args.out, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["id", "positive", "witness"])
            for row in zip(res.ids, res.positive, res.witness):
                w.writerow([int(v) for v in row])
    print(f"identified {int(res.positive.sum())} of {len(res.ids)} negative objects as positive")
    return 0


def cmd_prolog_gen(args) -> int:
    d = load_input(args)
    hit = np.flatnonzero(d.ids == args.query_id)
    if len(hit) == 0:
        raise DataError(f"no object with id {args.query_id}")
    params = fit_scaling(d)
    bits = encode_matrix(scale_values(d.values, params), predicate_from(args))
    pos = [r for r in d.positives if r != hit[0]]
    system = build_system(bits.take(pos).rows(), bits.row(int(hit[0])), d.ids[pos])
    Path(args.out).write_text(emit_prolog(system))
    ok, k = solve(system)
    print(f"defect({args.query_id}) {'holds via y = ' + str(system.rule_ids[k]) if ok else 'fails'}")
    return 0


def cmd_histogram(args) -> int:
    d = load_input(args)
    model, report = run(d, run_config(args))
    h = prototype_histogram(report.winners, report.truth, model.train_ids, args.include_zero)
    print(h.table())
    print(f"total {h.total}  gini {gini(h.counts()):.4f}" if h.counts().sum() else f"total {h.total}")
    if args.out:
        with open(args.out, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["y", "h_percent", "n"])
            for r in h.rows:
                w.writerow([r.train_id, f"{100 * r.fraction:.2f}", r.count])
    return 0


def cmd_sweep(args) -> int:
    d = load_input(args)
    spec = ExperimentSpec(d, Path(args.out_dir), run_config(args), args.t_values, args.p_values, args.seeds)
    cells = run_experiment(spec)
    failed = [c for c in cells if c.report is None]
    print(f"{len(cells) - len(failed)} cells ok, {len(failed)} failed; results in {args.out_dir}")
    return 1 if failed and len(failed) == len(cells) else 0


def cmd_gen_synthetic(args) -> int:
    spec = SyntheticSpec(m=args.m, n=args.n, defect_rate=args.defect_rate, archetypes=args.archetypes,
                         archetype_size=args.archetype_size, noise_sigma=args.noise_sigma, seed=args.seed)
    data = gen_synthetic(spec)
    write_csv(data.dataset, args.out)
    if args.truth_out:
        with open(args.truth_out, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["archetype", "column"])
            for a, cols in enumerate(data.archetype_columns):
                for j in cols:
                    w.writerow([a, j])
    print(f"wrote {spec.m} objects x {spec.n} columns, {len(data.dataset.positives)} positive")
    return 0


def cmd_plot(args) -> int:
    svg, dat = emit_plot(args.curve, args.out, args.dat, args.title)
    print(f"wrote {svg} and {dat}")
    return 0


def cmd_iris_csv(args) -> int:
    write_csv(iris(args.species), args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="thresholdbits", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def command(name, func, help_text, data=True, run_opts=False, predicate=False):
        p = sub.add_parser(name, help=help_text)
        if data:
            _add_input(p)
        if run_opts:
            _add_run(p)
        elif predicate:
            _add_predicate(p)
        _add_common(p)
        p.set_defaults(func=func)
        return p

    command("ingest-check", cmd_ingest_check, "validate a data file and print its shape")

    p = command("scale", cmd_scale, "write the column-wise auto-scaled dataset")
    p.add_argument("--out", required=True)
    p.add_argument("--params-out", help="CSV of column means and deviations")

    p = command("reduce", cmd_reduce, "drop columns where few positive objects peak")
    p.add_argument("--reduce-sharpness", type=int)
    p.add_argument("--out", help="reduced (scaled) dataset CSV")
    p.add_argument("--plan-out", help="CSV of column, num_occu, kept")

    p = command("train", cmd_train, "train a model and report on the non-training objects", run_opts=True)
    p.add_argument("--model-out", required=True)
    p.add_argument("--curve-out", help="CSV of (C, Q) cutoff evaluations")
    p.add_argument("--report-out", help="per-object CSV")

    p = sub.add_parser("predict", help="classify objects with a saved model")
    _add_input(p, labels=False)
    _add_common(p)
    p.add_argument("--model", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_predict, label_col=None)

    p = command("evaluate", cmd_evaluate, "score labelled data with a saved model")
    p.add_argument("--model", required=True)
    p.add_argument("--report-out")

    p = command("identify", cmd_identify, "flag negatives whose excesses all occur in a positive", predicate=True)
    p.add_argument("--out", help="CSV of id, positive, witness")

    p = command("prolog-gen", cmd_prolog_gen, "emit the implication system for one object", predicate=True)
    p.add_argument("--query-id", type=int, required=True)
    p.add_argument("--out", required=True)

    p = command("histogram", cmd_histogram, "count positives won by each training object", run_opts=True)
    p.add_argument("--include-zero", action="store_true")
    p.add_argument("--out")

    p = command("sweep", cmd_sweep, "run a t x p x seed parameter grid", run_opts=True)
    p.add_argument("--t-values", type=_float_list, help="start:stop:step or a,b,c")
    p.add_argument("--p-values", type=_float_list)
    p.add_argument("--seeds", type=_int_list, help="a..b or a,b,c")
    p.add_argument("--out-dir", required=True)

    p = command("gen-synthetic", cmd_gen_synthetic, "write a synthetic dataset with planted defects", data=False)
    p.add_argument("--m", type=int, default=10_000)
    p.add_argument("--n", type=int, default=900)
    p.add_argument("--defect-rate", type=float, default=0.05)
    p.add_argument("--archetypes", type=int, default=2)
    p.add_argument("--archetype-size", type=int)
    p.add_argument("--noise-sigma", type=float, default=0.3)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", required=True)
    p.add_argument("--truth-out", help="CSV of archetype, column")

    p = command("plot", cmd_plot, "render a curve CSV to SVG and a .dat file", data=False)
    p.add_argument("--curve", required=True)
    p.add_argument("--out")
    p.add_argument("--dat")
    p.add_argument("--title")

    p = command("iris-csv", cmd_iris_csv, "write the bundled iris data with one species as positive", data=False)
    p.add_argument("--species", choices=IRIS_SPECIES, required=True)
    p.add_argument("--out", required=True)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        resolve_options(args)
        return args.func(args)
    except ThresholdBitsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - anything else is a bug
        print(f"internal error: {exc!r}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
