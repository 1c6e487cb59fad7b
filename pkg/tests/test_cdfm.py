import numpy as np
import pytest

from exceptions.forecast_exceptions import ShapeMismatchError
from forecasting.backbone import DenseLayer
from forecasting.cdfm import (
    backward,
    forward,
    forward_parts,
    fusion_weights,
    init_cdfm,
    predict_horizon_sigma,
    with_mask,
)


def random_state(seed, fusion="dynamic"):
    rng = np.random.default_rng(seed)
    state = init_cdfm(8, 4, 2, 3, rng, fusion=fusion)
    for model in (state.stationary, state.nonstationary):
        model.b_seasonal[...] = rng.normal(scale=0.1, size=model.b_seasonal.shape)
        model.b_trend[...] = rng.normal(scale=0.1, size=model.b_trend.shape)
    state.sigma_predictor.W[...] = 0.01 * rng.uniform(-1, 1, size=state.sigma_predictor.W.shape)
    state.sigma_predictor.b[...] = 0.5
    state.lam[...] = 0.2
    return state, rng


def test_zero_mask_returns_stationary_forecast_exactly(tiny_state, rng):
    state = with_mask(tiny_state, [0, 0])
    x = rng.normal(size=(8, 2))
    y_hat, parts = forward(state, x)
    np.testing.assert_array_equal(y_hat, parts["y_s"])
    np.testing.assert_array_equal(parts["w"], 0.0)


def test_saturated_weight_returns_nonstationary_forecast(tiny_state, rng):
    tiny_state.lam[0] = 1e6
    x = rng.normal(size=(8, 2))
    y_hat, parts = forward(tiny_state, x)
    assert parts["w"][0] == 1.0
    np.testing.assert_array_equal(y_hat[:, 0], parts["y_ns"][:, 0])


def test_half_weight_fuses_midway():
    state = init_cdfm(8, 4, 1, 3, np.random.default_rng(0), fusion="static")
    for model in (state.stationary, state.nonstationary):
        model.W_seasonal[...] = 0.0
        model.W_trend[...] = 0.0
    state.nonstationary.b_trend[...] = 2.0
    state.lam[...] = 0.5
    x = 4.0 + np.array([-1.0, 1.0] * 4)[:, None]
    y_hat, parts = forward(state, x)
    np.testing.assert_allclose(parts["y_ns"], 2.0)
    np.testing.assert_allclose(parts["y_s"], 4.0)
    np.testing.assert_allclose(y_hat, 3.0)


def test_fused_output_lies_between_branches(rng):
    state, _ = random_state(3)
    state.lam[...] = rng.uniform(0, 2, size=2)
    x = rng.normal(size=(50, 8, 2))
    y_hat, parts = forward(state, x)
    low = np.minimum(parts["y_s"], parts["y_ns"]) - 1e-12
    high = np.maximum(parts["y_s"], parts["y_ns"]) + 1e-12
    assert np.all((low <= y_hat) & (y_hat <= high))
    assert np.all((0 <= parts["w"]) & (parts["w"] <= 1))


def test_batched_forward_matches_single(tiny_state, rng):
    x = rng.normal(size=(5, 8, 2))
    batched, _ = forward(tiny_state, x)
    for b in range(5):
        single, _ = forward(tiny_state, x[b])
        np.testing.assert_allclose(single, batched[b], atol=1e-12)


def test_forward_shape_mismatch(tiny_state):
    with pytest.raises(ShapeMismatchError):
        forward(tiny_state, np.zeros((8, 3)))
    with pytest.raises(ShapeMismatchError):
        forward(tiny_state, np.zeros((6, 2)))


def test_predict_horizon_sigma():
    layer = DenseLayer(W=np.zeros((1, 5)), b=np.array([0.3]))
    assert predict_horizon_sigma(layer, np.arange(4.0), 2.0) == pytest.approx(0.3)

    layer = DenseLayer(W=np.array([[1.0, 0, 0, 0, 0]]), b=np.zeros(1))
    assert predict_horizon_sigma(layer, np.arange(4.0), 1.7) == pytest.approx(1.7)

    rng = np.random.default_rng(5)
    layer = DenseLayer(W=rng.normal(size=(1, 5)), b=rng.normal(size=1))
    x_col = rng.normal(size=4)
    expected = layer.W[0, 0] * 0.9 + sum(layer.W[0, i + 1] * x_col[i] for i in range(4)) + layer.b[0]
    assert abs(predict_horizon_sigma(layer, x_col, 0.9) - expected) < 1e-12

    with pytest.raises(ShapeMismatchError):
        predict_horizon_sigma(layer, np.zeros(3), 1.0)


def test_forward_sigma_hat_uses_predictor_per_channel(tiny_state, rng):
    x = rng.normal(size=(8, 2))
    _, parts = forward(tiny_state, x)
    sigma = x.std(axis=0)
    for n in range(2):
        expected = predict_horizon_sigma(tiny_state.sigma_predictor, x[:, n], sigma[n])
        assert parts["sigma_hat_y"][n] == pytest.approx(expected, rel=1e-12)


def test_predict_horizon_sigma_batched_matches_single():
    rng = np.random.default_rng(6)
    layer = DenseLayer(W=rng.normal(size=(1, 5)), b=rng.normal(size=1))
    x_cols = rng.normal(size=(3, 2, 4))
    sigmas = rng.uniform(0.5, 2.0, size=(3, 2))
    batched = predict_horizon_sigma(layer, x_cols, sigmas)
    assert batched.shape == (3, 2)
    for i in range(3):
        for n in range(2):
            single = predict_horizon_sigma(layer, x_cols[i, n], sigmas[i, n])
            assert batched[i, n] == pytest.approx(single, rel=1e-12)


def test_fusion_weights_respect_mask(tiny_state, rng):
    state = with_mask(tiny_state, [1, 0])
    weights = fusion_weights(state, rng.normal(size=(10, 8, 2)))
    assert weights.shape == (10, 2)
    np.testing.assert_array_equal(weights[:, 1], 0.0)
    assert np.all(weights[:, 0] > 0)


def test_with_mask_validation(tiny_state):
    with pytest.raises(ShapeMismatchError):
        with_mask(tiny_state, [1, 0, 1])
    with pytest.raises(ValueError):
        with_mask(tiny_state, [0.5, 1])
    masked = with_mask(tiny_state, [0, 1])
    assert masked.selected == (1,)
    assert masked.stationary is tiny_state.stationary


@pytest.mark.parametrize("seed", range(20))
@pytest.mark.parametrize("fusion", ["dynamic", "static"])
def test_gradients_match_finite_differences(seed, fusion):
    state, rng = random_state(seed, fusion)
    x = rng.normal(size=(3, 8, 2))
    y = rng.normal(size=(3, 4, 2))
    _, parts = forward_parts(state, x)
    assert np.all((parts.w_raw > 0) & (parts.w_raw < 1))

    _, grads = backward(state, x, y)
    step = 1e-6
    for name, tensor in state.parameters().items():
        numeric = np.zeros_like(tensor)
        for idx in np.ndindex(tensor.shape):
            saved = tensor[idx]
            tensor[idx] = saved + step
            plus = backward(state, x, y)[0]
            tensor[idx] = saved - step
            minus = backward(state, x, y)[0]
            tensor[idx] = saved
            numeric[idx] = (plus - minus) / (2 * step)
        np.testing.assert_allclose(grads[name], numeric, rtol=1e-4, atol=1e-8, err_msg=name)


def test_zero_mask_detaches_fusion_parameters(tiny_state, rng):
    state = with_mask(tiny_state, [0, 0])
    _, grads = backward(state, rng.normal(size=(4, 8, 2)), rng.normal(size=(4, 4, 2)))
    for name in ("nonstationary.W_seasonal", "nonstationary.W_trend", "nonstationary.b_trend",
                 "sigma_predictor.W", "sigma_predictor.b", "lambda"):
        np.testing.assert_array_equal(grads[name], 0.0)
    assert np.any(grads["stationary.W_trend"] != 0)


def test_lambda_gradient_negative_when_nonstationary_branch_is_closer(tiny_state, rng):
    x = rng.normal(size=(6, 8, 2))
    _, parts = forward(tiny_state, x)
    assert np.all((parts["w"] > 0) & (parts["w"] < 1))
    target = parts["y_ns"].copy()
    _, grads = backward(tiny_state, x, target)
    assert grads["lambda"][0] < 0


def test_nonstationary_fusion_uses_only_nonstationary_branch(rng):
    state, _ = random_state(1, fusion="nonstationary")
    x = rng.normal(size=(4, 8, 2))
    y_hat, parts = forward(state, x)
    np.testing.assert_array_equal(y_hat, parts["y_ns"])
    _, grads = backward(state, x, rng.normal(size=(4, 4, 2)))
    np.testing.assert_array_equal(grads["stationary.W_seasonal"], 0.0)
    np.testing.assert_array_equal(grads["lambda"], 0.0)


def test_backward_target_shape_mismatch(tiny_state):
    with pytest.raises(ShapeMismatchError):
        backward(tiny_state, np.zeros((2, 8, 2)), np.zeros((2, 5, 2)))


def test_parameters_share_memory(tiny_state):
    params = tiny_state.parameters()
    params["lambda"][0] = 0.7
    assert tiny_state.lam[0] == 0.7
    assert set(params) >= {"stationary.W_seasonal", "nonstationary.b_trend", "sigma_predictor.W", "lambda"}
