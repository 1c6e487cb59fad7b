"""Choose the channels whose non-stationary forecasts get fused.

Two stages: rank channels by g = nonstat + rho * sim and keep the top
floor(alpha * N); after training, drop candidates whose validation loss got
worse under fusion by more than a relative tolerance tau.
"""

import logging
import math
from typing import List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel

from config.settings import DEFAULT_RHO, DEFAULT_TAU
from exceptions.forecast_exceptions import (
    ConfigError,
    ConstantChannelError,
    InsufficientDataError,
    ShapeMismatchError,
)
from timeseries.dataset import TimeSeriesDataset, history_windows

logger = logging.getLogger(__name__)


class ChannelScore(BaseModel):
    index: int
    channel: str
    nonstat: float
    sim: float
    g: float
    selected_topk: bool = False
    consistent: Optional[bool] = None
    stationary_val_loss: Optional[float] = None
    fusion_val_loss: Optional[float] = None


def build_scores(
    channel_names: Sequence[str],
    nonstat: Sequence[float],
    sim: Sequence[float],
    rho: float = DEFAULT_RHO,
) -> List[ChannelScore]:
    """Combine per-channel non-stationarity and similarity into scores."""
    if not len(channel_names) == len(nonstat) == len(sim):
        raise ShapeMismatchError(
            f"got {len(channel_names)} names, {len(nonstat)} nonstat and {len(sim)} sim values"
        )
    return [
        ChannelScore(index=i, channel=name, nonstat=float(n), sim=float(s), g=float(n) + rho * float(s))
        for i, (name, n, s) in enumerate(zip(channel_names, nonstat, sim))
    ]


def channel_scores(
    ds: TimeSeriesDataset, L: int, rho: float = DEFAULT_RHO, H: int = 0
) -> List[ChannelScore]:
    """Scores from the training rows of a split dataset.

    nonstat: mean population std of the history of every (L + H)-row training
    window, the same windows training iterates over.
    sim: mean absolute Pearson correlation with every channel, itself included.
    """
    split = ds.require_split()
    if H < 0:
        raise ConfigError(f"horizon must be non-negative, got {H}")
    windows, _ = history_windows(ds, L, rows=split.train_end - H)
    if windows.shape[0] == 0:
        raise InsufficientDataError(
            f"training split of {split.train_end} rows admits no window with L={L}, H={H}"
        )
    nonstat = windows.std(axis=1).mean(axis=0)

    train = ds.values[: split.train_end]
    spread = train.std(axis=0)
    for i, s in enumerate(spread):
        if not s > 0:
            raise ConstantChannelError(
                f"Pearson correlation is undefined for constant channel '{ds.channel_names[i]}'",
                channel=ds.channel_names[i],
            )
    corr = np.atleast_2d(np.corrcoef(train, rowvar=False))
    sim = np.abs(corr).mean(axis=1)

    scores = build_scores(ds.channel_names, nonstat, sim, rho)
    logger.debug(
        "Channel scores: " + ", ".join(f"{s.channel}={s.g:.4f}" for s in scores)
    )
    return scores


def select_topk(scores: Sequence[ChannelScore], alpha: float) -> Tuple[int, ...]:
    """Indices of the floor(alpha * N) highest-g channels, ties to the lower index."""
    if not 0 < alpha <= 1:
        raise ConfigError(f"alpha must lie in (0, 1], got {alpha}")
    # the nudge keeps e.g. 0.7 * 10 from flooring to 6
    k = math.floor(alpha * len(scores) + 1e-9)
    if k == 0:
        logger.warning(
            f"alpha={alpha} selects no channel out of {len(scores)}; fusion is disabled"
        )
        return ()
    ranked = sorted(scores, key=lambda s: (-s.g, s.index))
    return tuple(sorted(s.index for s in ranked[:k]))


def consistency_filter(
    candidates: Sequence[int],
    stationary_val_loss: Sequence[float],
    fusion_val_loss: Sequence[float],
    tau: float = DEFAULT_TAU,
) -> Tuple[int, ...]:
    """Keep candidate i iff fusion_val_loss[i] <= stationary_val_loss[i] * (1 + tau)."""
    if tau < 0:
        raise ConfigError(f"tau must be non-negative, got {tau}")
    kept = []
    for i in sorted(candidates):
        if fusion_val_loss[i] <= stationary_val_loss[i] * (1.0 + tau):
            kept.append(i)
        else:
            logger.info(
                f"Channel {i} excluded from fusion: validation loss "
                f"{stationary_val_loss[i]:.4f} -> {fusion_val_loss[i]:.4f}"
            )
    return tuple(kept)


def mask_from(indices: Sequence[int], N: int) -> np.ndarray:
    mask = np.zeros(N)
    mask[list(indices)] = 1.0
    return mask


def annotate_scores(
    scores: Sequence[ChannelScore],
    topk: Sequence[int],
    stationary_val_loss: Optional[Sequence[float]] = None,
    fusion_val_loss: Optional[Sequence[float]] = None,
    tau: float = DEFAULT_TAU,
) -> List[ChannelScore]:
    """Copies of ``scores`` with the selection outcome filled in.

    ``consistent`` applies the loss rule to every channel, candidate or not;
    without losses (no training yet) the consistency columns stay empty.
    """
    topk = set(topk)
    have_losses = stationary_val_loss is not None and fusion_val_loss is not None
    annotated = []
    for s in scores:
        update = {"selected_topk": s.index in topk}
        if have_losses:
            update["consistent"] = bool(
                fusion_val_loss[s.index] <= stationary_val_loss[s.index] * (1.0 + tau)
            )
            update["stationary_val_loss"] = float(stationary_val_loss[s.index])
            update["fusion_val_loss"] = float(fusion_val_loss[s.index])
        annotated.append(s.model_copy(update=update))
    return annotated
