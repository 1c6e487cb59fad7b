"""Run configuration: validated model, flat key-value config files, precedence."""

import logging
from pathlib import Path
from typing import Any, Dict, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from config import settings
from exceptions.forecast_exceptions import ConfigError

logger = logging.getLogger(__name__)


class TrainConfig(BaseModel):
    """Every knob of a training / evaluation run."""

    model_config = ConfigDict(extra="forbid", validate_assignment=True)

    L: int = Field(settings.DEFAULT_LOOKBACK, gt=0, description="History length")
    H: int = Field(settings.DEFAULT_HORIZON, gt=0, description="Horizon length")
    lr: float = Field(settings.DEFAULT_LR, gt=0)
    batch_size: int = Field(settings.DEFAULT_BATCH_SIZE, gt=0)
    max_epochs: int = Field(settings.DEFAULT_MAX_EPOCHS, gt=0)
    patience: int = Field(settings.DEFAULT_PATIENCE, ge=0)
    alpha: float = Field(settings.DEFAULT_ALPHA, gt=0, le=1)
    rho: float = settings.DEFAULT_RHO
    tau: float = Field(settings.DEFAULT_TAU, ge=0)
    seed: int = settings.DEFAULT_SEED
    kernel: int = settings.DEFAULT_KERNEL
    epsilon: float = Field(settings.NORM_EPSILON, gt=0)
    individual: bool = True
    fusion: Literal["dynamic", "static", "nonstationary"] = "dynamic"
    split_scheme: Literal["auto", "ratio", "ett-hour", "ett-minute"] = "auto"
    date_column: str = settings.DEFAULT_DATE_COLUMN
    log_elapsed: bool = False

    @field_validator("kernel")
    @classmethod
    def _odd_kernel(cls, value):
        if value < 3 or value % 2 == 0:
            raise ValueError(f"kernel must be odd and >= 3, got {value}")
        return value

    def kernel_for(self, lookback: Optional[int] = None) -> int:
        """The kernel actually usable with a history of ``lookback`` rows."""
        lookback = self.L if lookback is None else lookback
        if self.kernel > lookback:
            raise ConfigError(
                f"kernel {self.kernel} exceeds lookback {lookback}; pass a smaller --kernel"
            )
        return self.kernel


# Config-file / flag names that differ from the model field names
KEY_ALIASES = {
    "l": "L",
    "h": "H",
    "lookback": "L",
    "horizon": "H",
    "epochs": "max_epochs",
    "learning_rate": "lr",
}


def _canonical_key(key: str) -> str:
    key = key.strip().lower().replace("-", "_")
    return KEY_ALIASES.get(key, key)


def load_config_file(path) -> Dict[str, str]:
    """Parse a flat ``key = value`` (or ``key: value``) text file.

    Keys mirror the command-line flag names; ``#`` starts a comment.
    """
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"Config file not found: {path}")

    values: Dict[str, str] = {}
    for lineno, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        sep = "=" if "=" in line else ":" if ":" in line else None
        if sep is None:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split(sep, 1))
        if not key:
            raise ConfigError(f"{path}:{lineno}: empty key")
        values[_canonical_key(key)] = value

    unknown = sorted(set(values) - set(TrainConfig.model_fields))
    if unknown:
        raise ConfigError(f"{path}: unknown config keys {unknown}")
    logger.debug(f"Loaded {len(values)} config values from {path}")
    return values


def resolve_config(
    file_values: Optional[Dict[str, Any]] = None,
    flag_values: Optional[Dict[str, Any]] = None,
) -> TrainConfig:
    """Built-in defaults < config file < flags."""
    merged: Dict[str, Any] = {}
    for source in (file_values or {}, flag_values or {}):
        for key, value in source.items():
            if value is None:
                continue
            merged[_canonical_key(key)] = value
    try:
        return TrainConfig(**merged)
    except ValidationError as e:
        first = e.errors()[0]
        field = ".".join(str(part) for part in first["loc"])
        raise ConfigError(f"invalid config value for '{field}': {first['msg']}") from e
