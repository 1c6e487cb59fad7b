"""Entropy as a measure of non-stationarity.

A Gaussian closed form driven only by the window std, and a distribution-free
kernel density estimate, compared window by window to show that the entropy
of a window rises with its variance.
"""

import logging
import math
from typing import List, Optional, Union

import numpy as np
from pydantic import BaseModel, Field
from scipy.special import logsumexp

from config.settings import (
    ENTROPY_MIN_WINDOWS,
    KDE_CHUNK_SIZE,
    KDE_MIN_SAMPLES,
    PARALLEL_MAX_WORKERS,
    SILVERMAN_FACTOR,
)
from exceptions.forecast_exceptions import (
    ConfigError,
    DegenerateDistributionError,
    DomainError,
    InsufficientDataError,
)
from timeseries.dataset import TimeSeriesDataset, history_windows
from utils.performance import parallel_map, timing_decorator

logger = logging.getLogger(__name__)


def gaussian_entropy(sigma: float) -> float:
    """0.5 * ln(2 * pi * sigma^2), the closed form used in the reports."""
    if not (np.isfinite(sigma) and sigma > 0):
        raise DomainError(f"sigma must be a positive finite number, got {sigma}")
    return 0.5 * math.log(2.0 * math.pi * sigma * sigma)


def gaussian_differential_entropy(sigma: float) -> float:
    """0.5 * ln(2 * pi * e * sigma^2), what a density estimate converges to."""
    return gaussian_entropy(sigma) + 0.5


def silverman_bandwidth(samples) -> float:
    x = np.asarray(samples, dtype=np.float64).ravel()
    return SILVERMAN_FACTOR * x.std(ddof=1) * x.size ** (-0.2)


def kde_entropy(samples, bandwidth: Optional[float] = None) -> float:
    """Leave-one-out Gaussian-kernel estimate of the differential entropy.

    Returns -(1/n) * sum_i ln p(x_i), where p(x_i) is the kernel density of the
    other n - 1 samples at x_i.
    """
    x = np.asarray(samples, dtype=np.float64).ravel()
    n = x.size
    if n < KDE_MIN_SAMPLES:
        raise InsufficientDataError(f"kde_entropy needs at least {KDE_MIN_SAMPLES} samples, got {n}")
    if not np.all(np.isfinite(x)):
        raise DomainError("samples contain NaN or Inf")
    if np.all(x == x[0]):
        raise DegenerateDistributionError("all samples are equal; the density is degenerate")
    if bandwidth is None:
        bandwidth = silverman_bandwidth(x)
    elif not bandwidth > 0:
        raise DomainError(f"bandwidth must be positive, got {bandwidth}")

    log_norm = math.log((n - 1) * bandwidth * math.sqrt(2.0 * math.pi))
    log_density = np.empty(n)
    for start in range(0, n, KDE_CHUNK_SIZE):
        stop = min(start + KDE_CHUNK_SIZE, n)
        z = (x[start:stop, None] - x[None, :]) / bandwidth
        log_kernel = -0.5 * z * z
        rows = np.arange(stop - start)
        log_kernel[rows, start + rows] = -np.inf
        log_density[start:stop] = logsumexp(log_kernel, axis=1) - log_norm
    return float(-log_density.mean())


class EntropyRow(BaseModel):
    origin: int
    sigma: float
    h_gauss: float
    h_kde: float


class EntropyReport(BaseModel):
    channel: str
    L: int
    rows: List[EntropyRow] = Field(default_factory=list)
    pearson_sigma_hkde: Optional[float] = None
    correlation_defined: bool = False
    skipped: int = 0


def _resolve_channel(ds: TimeSeriesDataset, channel: Union[int, str]) -> int:
    if isinstance(channel, str) and not channel.lstrip("-").isdigit():
        if channel not in ds.channel_names:
            raise ConfigError(f"unknown channel '{channel}'; available: {list(ds.channel_names)}")
        return ds.channel_names.index(channel)
    index = int(channel)
    if not 0 <= index < ds.N:
        raise ConfigError(f"channel index {index} out of range for {ds.N} channels")
    return index


@timing_decorator
def variance_entropy_report(
    ds: TimeSeriesDataset,
    channel: Union[int, str],
    L: int,
    bandwidth: Optional[float] = None,
    max_workers: Optional[int] = PARALLEL_MAX_WORKERS,
) -> EntropyReport:
    """Per-window std, closed-form entropy and KDE entropy of one channel.

    Windows cover the training rows of a split dataset, or every row otherwise.
    Degenerate (constant) windows are skipped and counted.
    """
    index = _resolve_channel(ds, channel)
    rows = ds.split.train_end if ds.split is not None else ds.T
    windows, origins = history_windows(ds, L, rows)
    if windows.shape[0] < ENTROPY_MIN_WINDOWS:
        raise InsufficientDataError(
            f"{windows.shape[0]} windows of length {L} available, need {ENTROPY_MIN_WINDOWS}"
        )
    series = windows[:, :, index]

    def analyze(s: int) -> Optional[EntropyRow]:
        values = series[s]
        sigma = float(values.std())
        try:
            h_kde = kde_entropy(values, bandwidth)
        except DegenerateDistributionError:
            return None
        return EntropyRow(
            origin=int(origins[s]),
            sigma=sigma,
            h_gauss=gaussian_entropy(sigma),
            h_kde=h_kde,
        )

    results = parallel_map(analyze, range(series.shape[0]), max_workers=max_workers)
    kept = [row for row in results if row is not None]
    skipped = len(results) - len(kept)
    if skipped:
        logger.warning(f"Skipped {skipped} degenerate windows of channel '{ds.channel_names[index]}'")

    report = EntropyReport(channel=ds.channel_names[index], L=L, rows=kept, skipped=skipped)
    if len(kept) >= 2:
        sigmas = np.array([row.sigma for row in kept])
        entropies = np.array([row.h_kde for row in kept])
        if np.ptp(sigmas) > 0 and np.ptp(entropies) > 0:
            report.pearson_sigma_hkde = float(np.corrcoef(sigmas, entropies)[0, 1])
            report.correlation_defined = True
    if not report.correlation_defined:
        logger.warning(
            f"Variance-entropy correlation undefined for channel '{report.channel}' "
            f"({len(kept)} usable windows)"
        )
    else:
        logger.info(
            f"Channel '{report.channel}': Pearson(sigma, h_kde) = {report.pearson_sigma_hkde:.4f} "
            f"over {len(kept)} windows"
        )
    return report
