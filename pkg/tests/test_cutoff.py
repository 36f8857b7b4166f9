import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from helpers import dense_oracle, hill_objective, random_hill
from thresholdbits.cutoff import (Confusion, ScoreVector, confusion, grid_cutoff, grid_search, kappa_from_counts,
                                  naive_cutoff, predict, quality, refined_cutoff, refined_search)
from thresholdbits.errors import ConfigError, DataError


def test_predict_boundary_inclusive():
    assert predict([0.7], 0.7).tolist() == [1]
    assert predict([0.7], 0.7, inverted=True).tolist() == [0]


def test_predict_extremes():
    s = np.random.default_rng(0).random(50)
    assert predict(s, 0).all()
    assert not predict(np.append(s, 1.0), 1 + 1e-9).any()


def test_naive_cutoff():
    assert naive_cutoff(0.8, 0.2) == pytest.approx(0.3)
    assert naive_cutoff(0.4, 0.4) == 0
    assert naive_cutoff(1, 0) == 0.5
    assert naive_cutoff(0.8, 0.2, "midpoint") == pytest.approx(0.5)
    with pytest.raises(ConfigError):
        naive_cutoff(1, 0, "mean")


def test_quality_examples():
    assert quality([1, 0, 1], [1, 0, 1], "accuracy") == 1.0
    assert quality([1, 1, 0, 0], [1, 0, 1, 0], "accuracy") == 0.5
    assert quality([1, 1, 0, 0], [1, 0, 1, 0], "kappa") == 0.0
    assert quality([0, 1, 0, 1], [1, 0, 1, 0], "kappa") == -1.0
    with pytest.raises(DataError):
        quality([1], [1, 0])
    with pytest.raises(ConfigError):
        quality([1], [1], "f1")


def test_kappa_degenerate_counts():
    assert kappa_from_counts(Confusion(3, 0, 0, 0)) == 1.0
    assert kappa_from_counts(Confusion(0, 0, 5, 0)) == 1.0


def test_grid_separated_scores():
    sv = ScoreVector([0.9] * 4 + [0.1] * 6, [1] * 4 + [0] * 6)
    r = grid_cutoff(sv, "kappa", 11)
    assert (r.q_opt, r.c_opt) == (1.0, 0.2)
    assert r.evaluations == 11 and len(r.curve) == 11


def test_grid_constant_scores():
    truth = [1, 0, 0, 1, 0]
    sv = ScoreVector([0.4] * 5, truth)
    r = grid_cutoff(sv, "accuracy", 11)
    assert r.q_opt == max(quality([1] * 5, truth, "accuracy"), quality([0] * 5, truth, "accuracy"))


def test_grid_needs_both_classes():
    with pytest.raises(DataError):
        grid_cutoff(ScoreVector([0.1, 0.2], [0, 0]))


@settings(max_examples=100, deadline=None)
@given(st.integers(2, 60).flatmap(lambda n: st.tuples(
    arrays(np.float64, n, elements=st.floats(0, 1)), arrays(np.bool_, n))), st.booleans(), st.integers(2, 50))
def test_score_vector_matches_direct_prediction(data, inverted, n_grid):
    scores, truth = data
    sv = ScoreVector(scores, truth, inverted)
    for c in np.linspace(0, 1, n_grid):
        assert sv.counts(c) == confusion(predict(scores, c, inverted), truth)
    if sv.both_classes():
        r = grid_cutoff(sv, "kappa", n_grid)
        assert r.q_opt == max(q for _, q in r.curve)
        assert r.c_opt == min(c for c, q in r.curve if q == r.q_opt)


@settings(max_examples=50, deadline=None)
@given(arrays(np.float64, st.integers(1, 40), elements=st.floats(0, 1)), st.floats(0, 1), st.floats(0, 1))
def test_predict_monotone(scores, a, b):
    lo, hi = sorted((a, b))
    assert not (predict(scores, hi) & ~predict(scores, lo)).any()


def test_refined_on_hills_against_dense_grid():
    rng = np.random.default_rng(123)
    for _ in range(100):
        xs, ys = random_hill(rng)
        r = refined_search(hill_objective(xs, ys), 10, 1e-6)
        best, _ = dense_oracle(xs, ys, 10_001)
        assert r.q_opt >= best - 1e-4
        assert 0 <= r.c_opt <= 1
        assert r.evaluations < 1000


def test_refined_never_below_coarse_grid():
    rng = np.random.default_rng(7)
    for _ in range(50):
        scores = rng.random(200)
        truth = rng.random(200) < scores
        sv = ScoreVector(scores, truth)
        r = refined_cutoff(sv, "kappa", 10)
        coarse = max(q for _, q in r.curve[:10])
        assert r.q_opt >= coarse


def test_single_cell_walk_terminates():
    rng = np.random.default_rng(9)
    xs, ys = random_hill(rng)
    r = refined_search(hill_objective(xs, ys), 1, 1e-6)
    assert r.evaluations <= 10_000 + 3


def test_literal_walk_returns_last_iterate():
    xs, ys = random_hill(np.random.default_rng(3))
    r = refined_search(hill_objective(xs, ys), 10, 1e-6, literal=True)
    assert (r.c_opt, r.q_opt) == r.curve[-1]


def test_cap_is_respected(caplog):
    r = refined_search(lambda c: float(np.sin(40 * c)), 2, 1e-300, max_iter=50)
    assert r.evaluations == 2 + 2 + 50
    assert "iteration cap" in caplog.text


def test_refined_bad_parameters():
    with pytest.raises(ConfigError):
        refined_search(lambda c: c, 0)
    with pytest.raises(ConfigError):
        refined_search(lambda c: c, 5, 0)
    with pytest.raises(ConfigError):
        grid_search(lambda c: c, 1)
