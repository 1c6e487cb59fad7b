"""Channel-wise dynamic fusion of a stationary and a non-stationary DLinear predictor.

The stationary predictor sees instance-normalized input and its output is
denormalized; the non-stationary predictor sees the input as is. A per-sample,
per-channel weight W' in [0, 1] mixes the two:

    y_hat = W' * y_ns + (1 - W') * y_s

with W = clamp(lambda * (sigma_x + sigma_hat_y), 0, 1) and W' = W masked to the
selected channels. Instance statistics are constants of the sample: no
gradient flows through mu or sigma.
"""

import logging
from dataclasses import dataclass, replace
from typing import Dict, Optional, Sequence, Tuple

import numpy as np

from config.settings import LAMBDA_INIT, NORM_EPSILON
from exceptions.forecast_exceptions import ShapeMismatchError, TrainingError
from forecasting.backbone import (
    DenseLayer,
    DLinearParams,
    dlinear_backward,
    dlinear_forward,
    init_dense,
    init_dlinear,
)
from forecasting.instnorm import InstanceStats, denormalize, normalize

logger = logging.getLogger(__name__)


@dataclass
class CdfmState:
    stationary: DLinearParams
    nonstationary: DLinearParams
    sigma_predictor: DenseLayer
    lam: np.ndarray
    mask: np.ndarray
    alpha: float = 1.0
    rho: float = 1.0
    fusion: str = "dynamic"
    epsilon: float = NORM_EPSILON
    channel_names: Tuple[str, ...] = ()

    @property
    def L(self) -> int:
        return self.stationary.lookback

    @property
    def H(self) -> int:
        return self.stationary.horizon

    @property
    def N(self) -> int:
        return self.lam.shape[0]

    @property
    def selected(self) -> Tuple[int, ...]:
        return tuple(int(i) for i in np.flatnonzero(self.mask))

    def parameters(self) -> Dict[str, np.ndarray]:
        """Trainable tensors by name; the arrays are shared, not copied."""
        params = {}
        for prefix, model in (("stationary", self.stationary), ("nonstationary", self.nonstationary)):
            for name, tensor in model.tensors().items():
                params[f"{prefix}.{name}"] = tensor
        for name, tensor in self.sigma_predictor.tensors().items():
            params[f"sigma_predictor.{name}"] = tensor
        params["lambda"] = self.lam
        return params


@dataclass
class ForwardParts:
    y_s: np.ndarray
    y_ns: np.ndarray
    w: np.ndarray
    sigma_hat_y: np.ndarray
    # cached for the backward pass
    x_norm: np.ndarray
    stats: InstanceStats
    w_raw: np.ndarray


def init_cdfm(
    L: int,
    H: int,
    N: int,
    kernel: int,
    rng: np.random.Generator,
    individual: bool = True,
    fusion: str = "dynamic",
    alpha: float = 1.0,
    rho: float = 1.0,
    epsilon: float = NORM_EPSILON,
    channel_names: Optional[Sequence[str]] = None,
) -> CdfmState:
    """Fresh state: both predictors fan-in initialized, lambda at LAMBDA_INIT, every channel selected."""
    stationary = init_dlinear(L, H, N, kernel, rng, individual)
    nonstationary = init_dlinear(L, H, N, kernel, rng, individual)
    sigma_predictor = init_dense(L + 1, 1, rng)
    return CdfmState(
        stationary=stationary,
        nonstationary=nonstationary,
        sigma_predictor=sigma_predictor,
        lam=np.full(N, LAMBDA_INIT),
        mask=np.ones(N),
        alpha=alpha,
        rho=rho,
        fusion=fusion,
        epsilon=epsilon,
        channel_names=tuple(channel_names or (f"ch{i}" for i in range(N))),
    )


def with_mask(state: CdfmState, mask) -> CdfmState:
    """Shallow copy of ``state`` with another channel mask (parameters are shared)."""
    mask = np.asarray(mask, dtype=np.float64)
    if mask.shape != (state.N,):
        raise ShapeMismatchError(f"mask must have shape ({state.N},), got {mask.shape}")
    if not np.all((mask == 0) | (mask == 1)):
        raise ValueError("mask entries must be 0 or 1")
    return replace(state, mask=mask.copy())


def _sigma_inputs(x: np.ndarray, sigma: np.ndarray) -> np.ndarray:
    # (B, N, L+1): per channel, the history std followed by the history values
    return np.concatenate([sigma[..., None], x.transpose(0, 2, 1)], axis=-1)


def predict_horizon_sigma(layer: DenseLayer, x_col, sigma_x):
    """Affine estimate of the horizon std from concat(sigma_x, x_col); unconstrained sign.

    x_col is one L-long history (sigma_x a scalar, returns a float) or a stack of
    them with shape (..., L) and sigma_x of shape (...).
    """
    x_col = np.asarray(x_col, dtype=np.float64)
    sigma_x = np.asarray(sigma_x, dtype=np.float64)
    if layer.W.shape[1] != x_col.shape[-1] + 1:
        raise ShapeMismatchError(
            f"sigma predictor expects {layer.W.shape[1] - 1} history values, got {x_col.shape[-1]}"
        )
    sigma_hat = layer.forward(np.concatenate([sigma_x[..., None], x_col], axis=-1))[..., 0]
    return float(sigma_hat) if sigma_hat.ndim == 0 else sigma_hat


def _check_shapes(state: CdfmState, x: np.ndarray):
    if x.ndim != 3 or x.shape[1] != state.L or x.shape[2] != state.N:
        raise ShapeMismatchError(
            f"input shape {x.shape[1:] if x.ndim == 3 else x.shape} does not match "
            f"model (L={state.L}, N={state.N})"
        )


def forward_parts(state: CdfmState, x) -> Tuple[np.ndarray, ForwardParts]:
    """Batched forward pass, x: B x L x N -> (y_hat: B x H x N, parts)."""
    x = np.asarray(x, dtype=np.float64)
    _check_shapes(state, x)

    x_norm, stats = normalize(x, state.epsilon)
    y_s = denormalize(dlinear_forward(state.stationary, x_norm), stats)
    y_ns = dlinear_forward(state.nonstationary, x)

    B = x.shape[0]
    if state.fusion == "nonstationary":
        sigma_hat = np.zeros((B, state.N))
        w_raw = np.ones((B, state.N))
        w = np.ones((B, state.N))
    else:
        if state.fusion == "static":
            sigma_hat = np.zeros((B, state.N))
            w_raw = np.broadcast_to(state.lam, (B, state.N)).copy()
        else:
            sigma_hat = predict_horizon_sigma(state.sigma_predictor, x.transpose(0, 2, 1), stats.sigma)
            w_raw = state.lam * (stats.sigma + sigma_hat)
        w = np.clip(w_raw, 0.0, 1.0) * state.mask

    w3 = w[:, None, :]
    # channels with W' == 0 take y_s untouched, bit for bit
    y_hat = np.where(w3 > 0, w3 * y_ns + (1.0 - w3) * y_s, y_s)
    return y_hat, ForwardParts(
        y_s=y_s, y_ns=y_ns, w=w, sigma_hat_y=sigma_hat, x_norm=x_norm, stats=stats, w_raw=w_raw
    )


def forward(state: CdfmState, x):
    """Fused forecast of one L x N window (or a B x L x N batch).

    Returns (y_hat, parts) with parts = {"y_s", "y_ns", "w", "sigma_hat_y"}.
    """
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 2
    y_hat, parts = forward_parts(state, x[None] if single else x)
    public = {
        "y_s": parts.y_s,
        "y_ns": parts.y_ns,
        "w": parts.w,
        "sigma_hat_y": parts.sigma_hat_y,
    }
    if single:
        return y_hat[0], {key: value[0] for key, value in public.items()}
    return y_hat, public


def fusion_weights(state: CdfmState, x) -> np.ndarray:
    """W' per sample and channel (B x N)."""
    _, parts = forward_parts(state, np.asarray(x, dtype=np.float64))
    return parts.w


def backward(state: CdfmState, x, y_true):
    """Mean-squared-error loss of the fused forecast and its exact gradients.

    Returns (loss, grads) with grads keyed like ``state.parameters()``.
    """
    x = np.asarray(x, dtype=np.float64)
    y_true = np.asarray(y_true, dtype=np.float64)
    if x.ndim == 2:
        x, y_true = x[None], y_true[None]
    y_hat, parts = forward_parts(state, x)
    if y_true.shape != y_hat.shape:
        raise ShapeMismatchError(f"target shape {y_true.shape} != forecast shape {y_hat.shape}")

    diff = y_hat - y_true
    loss = float(np.mean(diff * diff))
    if not np.isfinite(loss):
        raise TrainingError("non-finite loss in forward pass")
    g = 2.0 * diff / diff.size

    w3 = parts.w[:, None, :]
    grads: Dict[str, np.ndarray] = {}

    s_grads, _ = dlinear_backward(
        state.stationary, parts.x_norm, (1.0 - w3) * g * parts.stats.sigma[:, None, :]
    )
    ns_grads, _ = dlinear_backward(state.nonstationary, x, w3 * g)
    for name, grad in s_grads.items():
        grads[f"stationary.{name}"] = grad
    for name, grad in ns_grads.items():
        grads[f"nonstationary.{name}"] = grad

    d_sigma_hat = np.zeros_like(parts.w)
    d_lam = np.zeros(state.N)
    if state.fusion != "nonstationary":
        d_w = np.sum(g * (parts.y_ns - parts.y_s), axis=1) * state.mask
        # clamp is flat outside (0, 1)
        d_w_raw = d_w * ((parts.w_raw > 0.0) & (parts.w_raw < 1.0))
        if state.fusion == "static":
            d_lam = d_w_raw.sum(axis=0)
        else:
            d_lam = np.sum(d_w_raw * (parts.stats.sigma + parts.sigma_hat_y), axis=0)
            d_sigma_hat = d_w_raw * state.lam

    dense_grads, _ = state.sigma_predictor.backward(
        _sigma_inputs(x, parts.stats.sigma), d_sigma_hat[..., None]
    )
    grads["sigma_predictor.W"] = dense_grads["W"]
    grads["sigma_predictor.b"] = dense_grads["b"]
    grads["lambda"] = d_lam

    for name, grad in grads.items():
        if not np.all(np.isfinite(grad)):
            raise TrainingError(f"non-finite gradient for '{name}'", parameter=name)
    return loss, grads
