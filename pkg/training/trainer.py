"""Training loop: channel selection, mini-batch Adam, early stopping, consistency filtering."""

import logging
import time
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, Field

from config.run_config import TrainConfig
from exceptions.forecast_exceptions import InsufficientDataError, TrainingError
from forecasting.cdfm import CdfmState, backward, init_cdfm, with_mask
from forecasting.optimizer import AdamState, adam_step
from selection.channel_selector import (
    ChannelScore,
    annotate_scores,
    channel_scores,
    consistency_filter,
    mask_from,
    select_topk,
)
from timeseries.dataset import TimeSeriesDataset, window_arrays
from training.evaluation import evaluate
from utils.performance import timing_decorator

logger = logging.getLogger(__name__)


class EpochRecord(BaseModel):
    epoch: int
    train_mse: float
    val_mse: float
    elapsed_seconds: Optional[float] = None


class TrainingLog(BaseModel):
    epochs: List[EpochRecord] = Field(default_factory=list)
    scores: List[ChannelScore] = Field(default_factory=list)
    topk: Tuple[int, ...] = ()
    selected: Tuple[int, ...] = ()
    best_epoch: int = 0
    best_val_mse: float = float("inf")
    stopped_early: bool = False


def _snapshot(params: Dict[str, np.ndarray]) -> Dict[str, np.ndarray]:
    return {name: tensor.copy() for name, tensor in params.items()}


def _restore(params: Dict[str, np.ndarray], snapshot: Dict[str, np.ndarray]):
    for name, tensor in params.items():
        tensor[...] = snapshot[name]


def _run_epoch(
    state: CdfmState,
    adam: AdamState,
    X: np.ndarray,
    Y: np.ndarray,
    order: np.ndarray,
    batch_size: int,
) -> float:
    params = state.parameters()
    total = 0.0
    for start in range(0, len(order), batch_size):
        batch = order[start : start + batch_size]
        loss, grads = backward(state, X[batch], Y[batch])
        adam_step(adam, params, grads)
        total += loss * len(batch)
    return total / len(order)


@timing_decorator
def train(
    ds: TimeSeriesDataset,
    config: TrainConfig,
    channels: Optional[Sequence[int]] = None,
) -> Tuple[CdfmState, TrainingLog]:
    """Fit a CDFM model on the training split of a standardized dataset.

    Returns the state restored to its best validation epoch, with the final
    channel mask applied, and the training log. Passing ``channels`` fixes the
    fused channels and skips both selection stages; an empty tuple trains the
    stationary predictor alone.
    """
    ds.require_split()
    L, H = config.L, config.H
    kernel = config.kernel_for(L)
    rng = np.random.Generator(np.random.PCG64(config.seed))

    X, Y, _ = window_arrays(ds, "train", L, H)
    if X.shape[0] == 0:
        raise InsufficientDataError(f"training split of '{ds.name}' admits no window with L={L}, H={H}")
    if window_arrays(ds, "val", L, H)[0].shape[0] == 0:
        raise InsufficientDataError(f"validation split of '{ds.name}' admits no window with L={L}, H={H}")

    scores = channel_scores(ds, L, config.rho, H)
    fixed = channels is not None
    topk = tuple(sorted(channels)) if fixed else select_topk(scores, config.alpha)
    logger.info(
        f"Top-{len(topk)} channels for fusion: {[ds.channel_names[i] for i in topk]}"
    )

    state = init_cdfm(
        L,
        H,
        ds.N,
        kernel,
        rng,
        individual=config.individual,
        fusion=config.fusion,
        alpha=config.alpha,
        rho=config.rho,
        epsilon=config.epsilon,
        channel_names=ds.channel_names,
    )
    state.mask = mask_from(topk, ds.N)

    adam = AdamState(lr=config.lr)
    params = state.parameters()
    log = TrainingLog(topk=topk)
    best = _snapshot(params)
    wait = 0

    for epoch in range(1, config.max_epochs + 1):
        started = time.perf_counter()
        order = rng.permutation(X.shape[0])
        try:
            train_mse = _run_epoch(state, adam, X, Y, order, config.batch_size)
        except TrainingError as e:
            raise TrainingError(str(e), epoch=epoch, parameter=e.parameter) from e

        val_mse = evaluate(state, ds, "val").mse
        if not np.isfinite(val_mse):
            raise TrainingError(f"validation loss diverged ({val_mse})", epoch=epoch)

        record = EpochRecord(epoch=epoch, train_mse=train_mse, val_mse=val_mse)
        if config.log_elapsed:
            record.elapsed_seconds = time.perf_counter() - started
        log.epochs.append(record)
        logger.info(f"Epoch {epoch}/{config.max_epochs}: train_mse={train_mse:.6f} val_mse={val_mse:.6f}")

        if val_mse < log.best_val_mse:
            log.best_val_mse = val_mse
            log.best_epoch = epoch
            best = _snapshot(params)
            wait = 0
        else:
            wait += 1
            if wait >= max(config.patience, 1):
                log.stopped_early = epoch < config.max_epochs
                logger.info(f"Early stopping at epoch {epoch}; best epoch {log.best_epoch}")
                break

    _restore(params, best)

    if not fixed and config.fusion != "nonstationary" and topk:
        stationary_loss = evaluate(state, ds, "val", variant="stationary").per_channel_mse
        fusion_loss = evaluate(state, ds, "val").per_channel_mse
        selected = consistency_filter(topk, stationary_loss, fusion_loss, config.tau)
        state = with_mask(state, mask_from(selected, ds.N))
        log.scores = annotate_scores(scores, topk, stationary_loss, fusion_loss, config.tau)
    else:
        selected = topk
        log.scores = annotate_scores(scores, topk)
    log.selected = selected
    logger.info(f"Final fusion channels: {[ds.channel_names[i] for i in selected]}")
    return state, log
