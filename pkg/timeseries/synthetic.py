"""Synthetic series with a known generating process."""

import numpy as np

from config.settings import (
    AMPLITUDE_DEPTH,
    AMPLITUDE_PERIOD,
    DEFAULT_SEED,
    SYNTHETIC_LENGTH,
    SYNTHETIC_NOISE_STD,
    SYNTHETIC_SLOPE,
    SYNTHETIC_STATIONARY_CHANNELS,
    SYNTHETIC_TREND_CHANNELS,
)
from exceptions.forecast_exceptions import ConfigError
from timeseries.dataset import TimeSeriesDataset, from_array


def trend_stationary_mix(
    T: int = SYNTHETIC_LENGTH,
    n_trend: int = SYNTHETIC_TREND_CHANNELS,
    n_stationary: int = SYNTHETIC_STATIONARY_CHANNELS,
    slope: float = SYNTHETIC_SLOPE,
    noise_std: float = SYNTHETIC_NOISE_STD,
    seed: int = DEFAULT_SEED,
) -> TimeSeriesDataset:
    """Trend channels slope * t + noise followed by zero-mean noise channels."""
    if n_trend + n_stationary == 0:
        raise ConfigError("need at least one channel")
    rng = np.random.Generator(np.random.PCG64(seed))
    t = np.arange(T, dtype=np.float64)[:, None]
    trend = slope * t + rng.normal(0.0, noise_std, size=(T, n_trend))
    stationary = rng.normal(0.0, noise_std, size=(T, n_stationary))
    names = [f"trend_{i}" for i in range(n_trend)] + [f"stationary_{i}" for i in range(n_stationary)]
    return from_array(np.hstack([trend, stationary]), names, name="trend_stationary_mix")


def amplitude_modulated(
    T: int = 2 * SYNTHETIC_LENGTH,
    period: float = AMPLITUDE_PERIOD,
    depth: float = AMPLITUDE_DEPTH,
    seed: int = DEFAULT_SEED,
) -> TimeSeriesDataset:
    """x_t = a_t * eps_t with a_t = 1 + depth * sin(2 pi t / period), eps ~ N(0, 1)."""
    if not 0 <= depth < 1:
        raise ConfigError(f"depth must lie in [0, 1), got {depth}")
    rng = np.random.Generator(np.random.PCG64(seed))
    t = np.arange(T, dtype=np.float64)
    amplitude = 1.0 + depth * np.sin(2.0 * np.pi * t / period)
    return from_array(amplitude * rng.standard_normal(T), ["amplitude_modulated"], name="amplitude_modulated")
