import numpy as np
import pytest

from exceptions.forecast_exceptions import ConfigError, InsufficientDataError, ShapeMismatchError
from forecasting.cdfm import fusion_weights, init_cdfm, with_mask
from timeseries.dataset import from_array, split_and_standardize, window_arrays
from training.evaluation import (
    MetricAccumulator,
    compute_metrics,
    evaluate,
    fusion_weight_table,
    predict,
    repeat_baseline,
)


@pytest.fixture
def walk_state():
    state = init_cdfm(8, 4, 3, 3, np.random.default_rng(9))
    state.lam[...] = 0.3
    return state


def test_perfect_prediction():
    y = np.random.default_rng(0).normal(size=(5, 4, 3))
    result = compute_metrics(y, y)
    assert result.mse == 0.0 and result.mae == 0.0
    assert result.n_samples == 5


def test_unit_error():
    y = np.zeros((2, 4, 3))
    result = compute_metrics(y + 1.0, y)
    assert result.mse == 1.0 and result.mae == 1.0
    assert result.per_channel_mse == [1.0, 1.0, 1.0]


def test_per_channel_metrics():
    y_true = np.zeros((1, 2, 2))
    y_pred = np.array([[[2.0, 0.0], [0.0, 0.0]]])
    result = compute_metrics(y_pred, y_true)
    assert result.per_channel_mse == [2.0, 0.0]
    assert result.per_channel_mae == [1.0, 0.0]
    assert result.mse == 1.0
    assert result.mae == 0.5


def test_single_window_counts_as_one_sample():
    assert compute_metrics(np.ones((4, 2)), np.zeros((4, 2))).n_samples == 1


def test_accumulator_errors():
    acc = MetricAccumulator(2)
    with pytest.raises(InsufficientDataError):
        acc.result()
    with pytest.raises(ShapeMismatchError):
        acc.update(np.zeros((1, 4, 2)), np.zeros((1, 3, 2)))


def test_repeat_baseline_matches_manual(random_walk_dataset):
    result = repeat_baseline(random_walk_dataset, 24, 12)
    X, Y, _ = window_arrays(random_walk_dataset, "test", 24, 12)
    err = Y - X[:, -1:, :]
    assert result.mse == pytest.approx(np.mean(err**2))
    assert result.mae == pytest.approx(np.mean(np.abs(err)))
    assert result.n_samples == 120 + 24 - 24 - 12 + 1


def test_repeat_baseline_on_flat_tail():
    values = np.concatenate([np.random.default_rng(1).normal(size=300), np.full(200, 5.0)])
    ds = split_and_standardize(from_array(values), (0.6, 0.2, 0.2))
    result = repeat_baseline(ds, 48, 24)
    assert result.mse == 0.0
    assert result.mae == 0.0


def test_chunked_evaluation_matches_single_pass(random_walk_dataset, walk_state, monkeypatch):
    whole = evaluate(walk_state, random_walk_dataset, "val")
    monkeypatch.setattr("training.evaluation.EVAL_CHUNK_SIZE", 7)
    chunked = evaluate(walk_state, random_walk_dataset, "val")
    assert chunked.mse == pytest.approx(whole.mse, rel=1e-12)
    assert chunked.n_samples == whole.n_samples


def test_zero_mask_equals_stationary_variant(random_walk_dataset, walk_state):
    state = with_mask(walk_state, [0, 0, 0])
    fused = evaluate(state, random_walk_dataset, "test", variant="fused")
    stationary = evaluate(state, random_walk_dataset, "test", variant="stationary")
    assert fused == stationary


def test_predict_variants(random_walk_dataset, walk_state):
    X, _, _ = window_arrays(random_walk_dataset, "test", 8, 4)
    fused = predict(walk_state, X[:10])
    y_s = predict(walk_state, X[:10], "stationary")
    y_ns = predict(walk_state, X[:10], "nonstationary")
    assert fused.shape == y_s.shape == y_ns.shape == (10, 4, 3)
    with pytest.raises(ConfigError):
        predict(walk_state, X[:10], "average")


def test_horizon_and_channel_mismatch(random_walk_dataset, walk_state):
    with pytest.raises(ShapeMismatchError):
        evaluate(walk_state, random_walk_dataset, H=6)
    two_channels = init_cdfm(8, 4, 2, 3, np.random.default_rng(0))
    with pytest.raises(ShapeMismatchError):
        evaluate(two_channels, random_walk_dataset)


def test_empty_split(walk_state):
    ds = split_and_standardize(from_array(np.random.default_rng(2).normal(size=(15, 3))), (0.6, 0.2, 0.2))
    with pytest.raises(InsufficientDataError):
        evaluate(walk_state, ds, "test")


def test_unsplit_dataset(walk_state):
    with pytest.raises(ConfigError):
        evaluate(walk_state, from_array(np.random.default_rng(2).normal(size=(100, 3))))


def test_fusion_weight_table(random_walk_dataset, walk_state):
    state = with_mask(walk_state, [1, 0, 1])
    origins, weights = fusion_weight_table(state, random_walk_dataset, "test")
    assert origins[0] == 480 - 8
    assert weights.shape == (len(origins), 3)
    np.testing.assert_array_equal(weights[:, 1], 0.0)
    assert np.all((weights >= 0) & (weights <= 1))

    X, _, _ = window_arrays(random_walk_dataset, "test", state.L, state.H)
    np.testing.assert_allclose(weights, fusion_weights(state, X), rtol=1e-12, atol=0)
