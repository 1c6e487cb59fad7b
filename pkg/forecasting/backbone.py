"""DLinear backbone: moving-average decomposition plus linear trend/seasonal maps.

Everything here is linear in its input, so the backward passes are exact
adjoints: transposed weight products and the transposed averaging operator.
"""

import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, Tuple

import numpy as np

from exceptions.forecast_exceptions import ConfigError, ShapeMismatchError

logger = logging.getLogger(__name__)


def _check_kernel(kernel: int, L: int):
    if kernel % 2 == 0:
        raise ConfigError(f"moving-average kernel must be odd, got {kernel}")
    if kernel < 3 or kernel > L:
        raise ConfigError(f"moving-average kernel must lie in [3, {L}], got {kernel}")


@lru_cache(maxsize=32)
def averaging_matrix(L: int, kernel: int) -> np.ndarray:
    """L x L centered moving average with edge replication padding."""
    _check_kernel(kernel, L)
    half = (kernel - 1) // 2
    A = np.zeros((L, L))
    for row in range(L):
        for offset in range(-half, half + 1):
            A[row, min(max(row + offset, 0), L - 1)] += 1.0 / kernel
    A.setflags(write=False)
    return A


def _as_batch(x) -> Tuple[np.ndarray, bool]:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 2:
        return x[None], True
    if x.ndim != 3:
        raise ShapeMismatchError(f"expected L x N or B x L x N input, got shape {x.shape}")
    return x, False


def decompose(x, kernel: int):
    """Split x (L x N or B x L x N) into (trend, seasonal) with seasonal = x - trend."""
    x = np.asarray(x, dtype=np.float64)
    A = averaging_matrix(x.shape[-2], kernel)
    trend = np.matmul(A, x)
    return trend, x - trend


@dataclass
class DLinearParams:
    """Trend/seasonal maps; leading axis is the channel (size N) or 1 when shared."""

    W_seasonal: np.ndarray
    b_seasonal: np.ndarray
    W_trend: np.ndarray
    b_trend: np.ndarray
    kernel: int

    @property
    def individual(self) -> bool:
        return self.channels != 1

    @property
    def lookback(self) -> int:
        return self.W_seasonal.shape[2]

    @property
    def horizon(self) -> int:
        return self.W_seasonal.shape[1]

    @property
    def channels(self) -> int:
        return self.W_seasonal.shape[0]

    def tensors(self) -> Dict[str, np.ndarray]:
        return {
            "W_seasonal": self.W_seasonal,
            "b_seasonal": self.b_seasonal,
            "W_trend": self.W_trend,
            "b_trend": self.b_trend,
        }


def init_dlinear(L: int, H: int, N: int, kernel: int, rng: np.random.Generator, individual: bool = True) -> DLinearParams:
    """Fan-in uniform weights in [-1/L, 1/L], zero biases."""
    _check_kernel(kernel, L)
    C = N if individual else 1
    bound = 1.0 / L
    return DLinearParams(
        W_seasonal=rng.uniform(-bound, bound, size=(C, H, L)),
        b_seasonal=np.zeros((C, H)),
        W_trend=rng.uniform(-bound, bound, size=(C, H, L)),
        b_trend=np.zeros((C, H)),
        kernel=kernel,
    )


def _check_input(params: DLinearParams, x: np.ndarray):
    if x.shape[1] != params.lookback:
        raise ShapeMismatchError(
            f"input has {x.shape[1]} history rows, model expects {params.lookback}"
        )
    if params.channels != 1 and x.shape[2] != params.channels:
        raise ShapeMismatchError(
            f"input has {x.shape[2]} channels, model has {params.channels}"
        )


def _apply(W: np.ndarray, z: np.ndarray) -> np.ndarray:
    """Per-channel W (C x H x L) applied to z (B x L x N) -> B x H x N."""
    if W.shape[0] == 1:
        return np.matmul(W[0], z)
    # (N, B, L) @ (N, L, H) -> (N, B, H)
    out = np.matmul(z.transpose(2, 0, 1), W.transpose(0, 2, 1))
    return out.transpose(1, 2, 0)


def dlinear_forward(params: DLinearParams, x) -> np.ndarray:
    """H x N (or B x H x N) forecast: W_s·seasonal + b_s + W_t·trend + b_t per channel."""
    xb, squeeze = _as_batch(x)
    _check_input(params, xb)
    trend, seasonal = decompose(xb, params.kernel)
    bias = (params.b_seasonal + params.b_trend).T  # H x C
    out = _apply(params.W_seasonal, seasonal) + _apply(params.W_trend, trend) + bias[None]
    return out[0] if squeeze else out


def _weight_grad(g: np.ndarray, z: np.ndarray, shared: bool) -> np.ndarray:
    if shared:
        # sum over batch and channels: (H, B*N) @ (B*N, L)
        H, L = g.shape[1], z.shape[1]
        return (g.transpose(1, 0, 2).reshape(H, -1) @ z.transpose(0, 2, 1).reshape(-1, L))[None]
    # (N, H, B) @ (N, B, L) -> (N, H, L)
    return np.matmul(g.transpose(2, 1, 0), z.transpose(2, 0, 1))


def _input_grad(W: np.ndarray, g: np.ndarray) -> np.ndarray:
    if W.shape[0] == 1:
        return np.matmul(W[0].T, g)
    # (N, B, H) @ (N, H, L) -> (N, B, L) -> (B, L, N)
    return np.matmul(g.transpose(2, 0, 1), W).transpose(1, 2, 0)


def dlinear_backward(params: DLinearParams, x, upstream_grad):
    """Exact gradients of <upstream_grad, dlinear_forward(params, x)>.

    Returns (grads: dict keyed like ``params.tensors()``, dx shaped like x).
    Parameter gradients are summed over the batch.
    """
    xb, squeeze = _as_batch(x)
    gb, _ = _as_batch(upstream_grad)
    _check_input(params, xb)
    expected = (xb.shape[0], params.horizon, xb.shape[2])
    if gb.shape != expected:
        raise ShapeMismatchError(f"upstream gradient has shape {gb.shape}, expected {expected}")

    shared = params.channels == 1
    trend, seasonal = decompose(xb, params.kernel)
    bias_grad = gb.sum(axis=(0, 2))[None] if shared else gb.sum(axis=0).T
    grads = {
        "W_seasonal": _weight_grad(gb, seasonal, shared),
        "b_seasonal": bias_grad,
        "W_trend": _weight_grad(gb, trend, shared),
        "b_trend": bias_grad.copy(),
    }

    d_seasonal = _input_grad(params.W_seasonal, gb)
    d_trend = _input_grad(params.W_trend, gb)
    # seasonal = (I - A) x, trend = A x
    A = averaging_matrix(params.lookback, params.kernel)
    dx = d_seasonal + np.matmul(A.T, d_trend - d_seasonal)
    return grads, (dx[0] if squeeze else dx)


@dataclass
class DenseLayer:
    """Affine map y = W x + b with W: out x in."""

    W: np.ndarray
    b: np.ndarray

    def forward(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.shape[-1] != self.W.shape[1]:
            raise ShapeMismatchError(
                f"dense layer expects {self.W.shape[1]} inputs, got {x.shape[-1]}"
            )
        return x @ self.W.T + self.b

    def backward(self, x, upstream_grad):
        """Returns (grads {"W", "b"}, dx) for <upstream_grad, forward(x)>."""
        x = np.asarray(x, dtype=np.float64)
        g = np.asarray(upstream_grad, dtype=np.float64)
        n_in, n_out = self.W.shape[1], self.W.shape[0]
        flat_x = x.reshape(-1, n_in)
        flat_g = g.reshape(-1, n_out)
        grads = {"W": flat_g.T @ flat_x, "b": flat_g.sum(axis=0)}
        return grads, g @ self.W

    def tensors(self) -> Dict[str, np.ndarray]:
        return {"W": self.W, "b": self.b}


def init_dense(n_in: int, n_out: int, rng: np.random.Generator) -> DenseLayer:
    bound = 1.0 / n_in
    return DenseLayer(W=rng.uniform(-bound, bound, size=(n_out, n_in)), b=np.zeros(n_out))
