"""Forecast metrics, model evaluation over a split, and the Repeat baseline."""

import logging
from typing import Callable, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel

from config.settings import EVAL_CHUNK_SIZE
from exceptions.forecast_exceptions import ConfigError, InsufficientDataError, ShapeMismatchError
from forecasting.cdfm import CdfmState, forward_parts, fusion_weights
from timeseries.dataset import TimeSeriesDataset, window_arrays

logger = logging.getLogger(__name__)

VARIANTS = ("fused", "stationary", "nonstationary")


class EvalResult(BaseModel):
    mse: float
    mae: float
    per_channel_mse: List[float]
    per_channel_mae: List[float]
    n_samples: int


class MetricAccumulator:
    """Running squared / absolute error sums per channel, fed chunk by chunk."""

    def __init__(self, N: int):
        self.sq = np.zeros(N)
        self.abs = np.zeros(N)
        self.n_samples = 0
        self.per_channel_count = 0

    def update(self, y_pred: np.ndarray, y_true: np.ndarray):
        if y_pred.shape != y_true.shape:
            raise ShapeMismatchError(f"prediction shape {y_pred.shape} != target shape {y_true.shape}")
        err = y_pred - y_true
        self.sq += np.sum(err * err, axis=(0, 1))
        self.abs += np.sum(np.abs(err), axis=(0, 1))
        self.n_samples += y_pred.shape[0]
        self.per_channel_count += y_pred.shape[0] * y_pred.shape[1]

    def result(self) -> EvalResult:
        if self.n_samples == 0:
            raise InsufficientDataError("no samples to evaluate")
        per_mse = self.sq / self.per_channel_count
        per_mae = self.abs / self.per_channel_count
        return EvalResult(
            mse=float(per_mse.mean()),
            mae=float(per_mae.mean()),
            per_channel_mse=[float(v) for v in per_mse],
            per_channel_mae=[float(v) for v in per_mae],
            n_samples=self.n_samples,
        )


def compute_metrics(y_pred, y_true) -> EvalResult:
    """MSE / MAE of S x H x N predictions (an H x N pair counts as one sample)."""
    y_pred = np.asarray(y_pred, dtype=np.float64)
    y_true = np.asarray(y_true, dtype=np.float64)
    if y_pred.ndim == 2:
        y_pred, y_true = y_pred[None], y_true[None]
    acc = MetricAccumulator(y_pred.shape[-1])
    acc.update(y_pred, y_true)
    return acc.result()


def predict(state: CdfmState, X: np.ndarray, variant: str = "fused") -> np.ndarray:
    """Forecasts for a batch of histories: the fused output or one branch alone."""
    if variant not in VARIANTS:
        raise ConfigError(f"unknown variant {variant!r}; expected one of {VARIANTS}")
    y_hat, parts = forward_parts(state, X)
    if variant == "stationary":
        return parts.y_s
    if variant == "nonstationary":
        return parts.y_ns
    return y_hat


def _check_compatible(state: CdfmState, ds: TimeSeriesDataset, H: Optional[int]):
    if H is not None and H != state.H:
        raise ShapeMismatchError(f"model forecasts H={state.H} steps, H={H} requested")
    if ds.N != state.N:
        raise ShapeMismatchError(f"model has N={state.N} channels, dataset '{ds.name}' has {ds.N}")


def _evaluate_windows(
    ds: TimeSeriesDataset,
    split: str,
    L: int,
    H: int,
    predictor: Callable[[np.ndarray], np.ndarray],
) -> EvalResult:
    X, Y, _ = window_arrays(ds, split, L, H)
    if X.shape[0] == 0:
        raise InsufficientDataError(
            f"{split} split of '{ds.name}' admits no window with L={L}, H={H}"
        )
    acc = MetricAccumulator(ds.N)
    for start in range(0, X.shape[0], EVAL_CHUNK_SIZE):
        stop = start + EVAL_CHUNK_SIZE
        acc.update(predictor(X[start:stop]), Y[start:stop])
    return acc.result()


def evaluate(
    state: CdfmState,
    ds: TimeSeriesDataset,
    split: str = "test",
    variant: str = "fused",
    H: Optional[int] = None,
) -> EvalResult:
    """MSE / MAE over every window of ``split`` in standardized units."""
    _check_compatible(state, ds, H)
    result = _evaluate_windows(ds, split, state.L, state.H, lambda X: predict(state, X, variant))
    logger.info(
        f"{variant} {split}: mse={result.mse:.6f} mae={result.mae:.6f} ({result.n_samples} windows)"
    )
    return result


def repeat_baseline(ds: TimeSeriesDataset, L: int, H: int, split: str = "test") -> EvalResult:
    """Every horizon row repeats the last history row; no training."""

    def repeat(X: np.ndarray) -> np.ndarray:
        return np.repeat(X[:, -1:, :], H, axis=1)

    result = _evaluate_windows(ds, split, L, H, repeat)
    logger.info(f"Repeat baseline {split}: mse={result.mse:.6f} mae={result.mae:.6f}")
    return result


def fusion_weight_table(
    state: CdfmState, ds: TimeSeriesDataset, split: str = "test"
) -> Tuple[np.ndarray, np.ndarray]:
    """(origins: S, weights: S x N) of W' over every window of a split."""
    _check_compatible(state, ds, None)
    X, _, origins = window_arrays(ds, split, state.L, state.H)
    chunks = [
        fusion_weights(state, X[start : start + EVAL_CHUNK_SIZE])
        for start in range(0, X.shape[0], EVAL_CHUNK_SIZE)
    ]
    weights = np.concatenate(chunks, axis=0) if chunks else np.empty((0, state.N))
    return origins, weights
