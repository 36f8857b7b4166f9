"""Threshold bit-vector classification of measurement data.

Scaled measurements become bit-vectors of threshold excesses; an object is
scored by the coincidence index of its excesses with those of a small set of
known positive objects, and a cutoff on that score classifies it.
"""

from .cutoff import CutoffResult, ScoreVector, grid_cutoff, naive_cutoff, predict, quality, refined_cutoff
from .dimreduce import ReductionPlan, apply_reduction, plan_reduction
from .errors import ConfigError, DataError, EmptyCurve, InvariantError, LabelNotBinary
from .experiment import ExperimentSpec, run_experiment
from .histogram import PrototypeHistogram, gini, prototype_histogram
from .ingest import ColumnSelection, Dataset, load_csv, select_columns, write_csv
from .pipeline import RunConfig, RunReport, TrainedModel, evaluate, identify, run, select_training, train
from .predicates import IncidenceVector, PredicateConfig, encode, encode_dataset
from .prologgen import ImplicationSystem, build_system, emit_prolog, parse_prolog, solve
from .scale import ScalingParams, apply_scaling, fit_scaling
from .similarity import coincidence, cosine, kappa_bits, s2_to_set, s_to_set
from .synthetic import SyntheticSpec, gen_synthetic

__version__ = "0.1.0"
