"""Per-sample, per-channel instance normalization (statistics only, no learnable affine)."""

from dataclasses import dataclass

import numpy as np

from config.settings import NORM_EPSILON
from exceptions.forecast_exceptions import ShapeMismatchError


@dataclass(frozen=True)
class InstanceStats:
    """History-window mean and floored population std, shape (..., N)."""

    mu: np.ndarray
    sigma: np.ndarray


def normalize(x, epsilon: float = NORM_EPSILON):
    """Normalize along the time axis (-2) of an L x N matrix or a B x L x N batch.

    sigma is floored at ``epsilon``, so a constant column maps to zeros.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim < 2 or x.shape[-2] < 2:
        raise ShapeMismatchError(f"normalize needs at least 2 history rows, got shape {x.shape}")
    mu = x.mean(axis=-2)
    sigma = np.maximum(x.std(axis=-2), epsilon)
    x_norm = (x - mu[..., None, :]) / sigma[..., None, :]
    return x_norm, InstanceStats(mu=mu, sigma=sigma)


def denormalize(y_norm, stats: InstanceStats):
    """Invert normalize on a horizon matrix (H x N) or batch (B x H x N)."""
    y_norm = np.asarray(y_norm, dtype=np.float64)
    if y_norm.shape[-1] != stats.sigma.shape[-1]:
        raise ShapeMismatchError(
            f"horizon has {y_norm.shape[-1]} channels, stats have {stats.sigma.shape[-1]}"
        )
    return stats.sigma[..., None, :] * y_norm + stats.mu[..., None, :]
