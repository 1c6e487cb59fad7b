"""Time-series ingestion, train/val/test splitting, global standardization and windowing."""

import csv
import logging
import math
import re
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from config.settings import (
    DEFAULT_DATE_COLUMN,
    DEFAULT_RATIOS,
    ETT_HOUR_BORDERS,
    ETT_MINUTE_FACTOR,
    ETT_RATIOS,
    RATIO_TOLERANCE,
)
from exceptions.forecast_exceptions import (
    ConfigError,
    ConstantChannelError,
    DataFormatError,
    DataLoadError,
    InsufficientDataError,
)

logger = logging.getLogger(__name__)

SPLITS = ("train", "val", "test")


@dataclass(frozen=True)
class Split:
    """Row boundaries: train = [0, train_end), val = [train_end, val_end), test = [val_end, test_end)."""

    train_end: int
    val_end: int
    test_end: int


@dataclass(frozen=True)
class GlobalStats:
    """Raw per-channel mean and population std of the training rows."""

    mean: np.ndarray
    std: np.ndarray


@dataclass(frozen=True)
class TimeSeriesDataset:
    values: np.ndarray
    channel_names: Tuple[str, ...]
    timestamps: Tuple[str, ...]
    split: Optional[Split] = None
    global_stats: Optional[GlobalStats] = None
    name: str = "dataset"
    source: Optional[str] = None

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 2:
            raise DataFormatError(f"values must be a T x N matrix, got shape {values.shape}")
        if values.shape[1] != len(self.channel_names):
            raise DataFormatError(
                f"{values.shape[1]} value columns but {len(self.channel_names)} channel names"
            )
        if not np.all(np.isfinite(values)):
            raise DataLoadError("values contain NaN or Inf")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def T(self) -> int:
        return self.values.shape[0]

    @property
    def N(self) -> int:
        return self.values.shape[1]

    def require_split(self) -> Split:
        if self.split is None:
            raise ConfigError(f"dataset '{self.name}' has not been split yet")
        return self.split


@dataclass(frozen=True)
class WindowSample:
    """One history/horizon pair; ``origin`` is the absolute row of ``x[0]``."""

    x: np.ndarray
    y: np.ndarray
    origin: int = field(default=0)


def from_array(values, channel_names: Optional[Sequence[str]] = None, name="array", timestamps=None):
    """Build an unsplit dataset from an in-memory T x N array."""
    values = np.asarray(values, dtype=np.float64)
    if values.ndim == 1:
        values = values[:, None]
    if channel_names is None:
        channel_names = [f"ch{i}" for i in range(values.shape[1])]
    if timestamps is None:
        timestamps = [str(i) for i in range(values.shape[0])]
    return TimeSeriesDataset(
        values=values,
        channel_names=tuple(channel_names),
        timestamps=tuple(timestamps),
        name=name,
    )


_PARSER_LINE = re.compile(r"line (\d+)")


def _first_short_row(path: Path, width: int) -> Optional[Tuple[int, int]]:
    """Return (data row, field count) of the first non-blank row with fewer than width fields."""
    with path.open(newline="", encoding="utf-8") as handle:
        rows = (fields for fields in csv.reader(handle) if fields)
        next(rows, None)
        for index, fields in enumerate(rows):
            if len(fields) < width:
                return index, len(fields)
    return None


def load_csv(path, date_column: str = DEFAULT_DATE_COLUMN) -> TimeSeriesDataset:
    """Read an ETT-style CSV: header row, date column first, numeric channels after.

    Row indices in errors are 0-based data rows (the header is not counted).
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(str(path))

    try:
        frame = pd.read_csv(
            path,
            dtype=str,
            keep_default_na=False,
            encoding="utf-8",
            skip_blank_lines=True,
        )
    except pd.errors.EmptyDataError as e:
        raise DataFormatError(f"{path} is empty") from e
    except pd.errors.ParserError as e:
        match = _PARSER_LINE.search(str(e))
        row = int(match.group(1)) - 2 if match else None
        raise DataLoadError(f"malformed row in {path}: {e}", row=row) from e

    columns = [str(c) for c in frame.columns]
    if len(columns) < 2:
        raise DataFormatError(f"{path} needs a date column and at least one channel")
    if columns[0] != date_column:
        raise DataFormatError(
            f"first column of {path} is '{columns[0]}', expected date column '{date_column}'"
        )

    if frame.isna().to_numpy().any() or (frame == "").to_numpy().any():
        short = _first_short_row(path, len(columns))
        if short is not None:
            row, count = short
            raise DataLoadError(
                f"malformed row in {path}: expected {len(columns)} fields, saw {count}", row=row
            )

    channel_names = columns[1:]
    values = np.empty((len(frame), len(channel_names)), dtype=np.float64)
    for j, name in enumerate(channel_names):
        raw = frame[name]
        missing = raw.isna().to_numpy()
        if missing.any():
            row = int(np.argmax(missing))
            raise DataLoadError(f"missing cell in {path}", row=row, column=name)
        parsed = pd.to_numeric(raw.str.strip(), errors="coerce").to_numpy(dtype=np.float64)
        bad = ~np.isfinite(parsed)
        if bad.any():
            row = int(np.argmax(bad))
            raise DataLoadError(
                f"non-numeric or non-finite cell {raw.iloc[row]!r} in {path}",
                row=row,
                column=name,
            )
        values[:, j] = parsed

    dataset = TimeSeriesDataset(
        values=values,
        channel_names=tuple(channel_names),
        timestamps=tuple(frame[date_column].tolist()),
        name=path.stem,
        source=str(path),
    )
    logger.info(f"Loaded {path.name}: T={dataset.T}, N={dataset.N}")
    return dataset


def _standardize(ds: TimeSeriesDataset, split: Split) -> TimeSeriesDataset:
    if ds.global_stats is not None:
        raise ConfigError(f"dataset '{ds.name}' is already standardized")
    train = ds.values[: split.train_end]
    mean = train.mean(axis=0)
    std = train.std(axis=0)
    for i, s in enumerate(std):
        if not s > 0:
            raise ConstantChannelError(
                f"channel '{ds.channel_names[i]}' is constant over the training rows",
                channel=ds.channel_names[i],
            )
    standardized = (ds.values - mean) / std
    logger.info(
        f"Split {ds.name}: train={split.train_end}, "
        f"val={split.val_end - split.train_end}, test={split.test_end - split.val_end}"
    )
    return replace(
        ds,
        values=standardized,
        split=split,
        global_stats=GlobalStats(mean=mean, std=std),
    )


def split_and_standardize(ds: TimeSeriesDataset, ratios=(0.6, 0.2, 0.2)) -> TimeSeriesDataset:
    """Partition by floor arithmetic on the ratios and z-score with training statistics."""
    if len(ratios) != 3 or any(r < 0 for r in ratios):
        raise ConfigError(f"ratios must be three non-negative numbers, got {ratios}")
    if abs(sum(ratios) - 1.0) > RATIO_TOLERANCE:
        raise ConfigError(f"ratios must sum to 1, got {sum(ratios)}")

    # the small nudge keeps e.g. 10 * 0.6 from flooring to 5
    train_end = math.floor(ds.T * ratios[0] + 1e-9)
    val_end = math.floor(ds.T * (ratios[0] + ratios[1]) + 1e-9)
    if not 0 < train_end < val_end <= ds.T:
        raise InsufficientDataError(
            f"T={ds.T} is too short for ratios {tuple(ratios)} "
            f"(train_end={train_end}, val_end={val_end})"
        )
    return _standardize(ds, Split(train_end, val_end, ds.T))


def split_ett(ds: TimeSeriesDataset, freq: str = "hour") -> TimeSeriesDataset:
    """Fixed 12/4/4-month borders of the public ETT benchmark loader."""
    if freq not in ("hour", "minute"):
        raise ConfigError(f"ETT frequency must be 'hour' or 'minute', got {freq!r}")
    factor = ETT_MINUTE_FACTOR if freq == "minute" else 1
    train_end, val_end, test_end = (b * factor for b in ETT_HOUR_BORDERS)
    if ds.T < test_end:
        raise InsufficientDataError(
            f"ETT {freq} borders need {test_end} rows, '{ds.name}' has {ds.T}"
        )
    return _standardize(ds, Split(train_end, val_end, test_end))


def apply_split_scheme(ds: TimeSeriesDataset, scheme: str = "auto") -> TimeSeriesDataset:
    """Pick the split for a freshly loaded dataset.

    ``auto`` uses the ETT borders for files named ETTh*/ETTm* and ratios otherwise.
    """
    is_ett = ds.name.upper().startswith("ETT")
    if scheme == "auto":
        if ds.name.startswith("ETTh"):
            scheme = "ett-hour"
        elif ds.name.startswith("ETTm"):
            scheme = "ett-minute"
        else:
            scheme = "ratio"
    if scheme == "ett-hour":
        return split_ett(ds, "hour")
    if scheme == "ett-minute":
        return split_ett(ds, "minute")
    if scheme == "ratio":
        return split_and_standardize(ds, ETT_RATIOS if is_ett else DEFAULT_RATIOS)
    raise ConfigError(f"unknown split scheme {scheme!r}")


def destandardize(ds: TimeSeriesDataset, values) -> np.ndarray:
    """Map standardized values (last axis = channels) back to raw units."""
    if ds.global_stats is None:
        raise ConfigError(f"dataset '{ds.name}' has no global statistics")
    return np.asarray(values) * ds.global_stats.std + ds.global_stats.mean


def split_bounds(ds: TimeSeriesDataset, split: str, L: int) -> Tuple[int, int]:
    """Rows a split's windows may touch, history borrowed from the preceding split."""
    bounds = ds.require_split()
    if split == "train":
        return 0, bounds.train_end
    if split == "val":
        return max(0, bounds.train_end - L), bounds.val_end
    if split == "test":
        return max(0, bounds.val_end - L), bounds.test_end
    raise ConfigError(f"unknown split {split!r}; expected one of {SPLITS}")


def window_arrays(ds: TimeSeriesDataset, split: str, L: int, H: int):
    """Stacked windows of a split: (X: S x L x N, Y: S x H x N, origins: S).

    X and Y are read-only views into the dataset.
    """
    if L <= 0 or H <= 0:
        raise ConfigError(f"L and H must be positive, got L={L}, H={H}")
    start, end = split_bounds(ds, split, L)
    count = end - start - L - H + 1
    if count <= 0:
        empty = np.empty((0, L, ds.N))
        return empty, np.empty((0, H, ds.N)), np.empty(0, dtype=np.int64)

    segment = ds.values[start:end]
    # (S, N, L+H) -> (S, L+H, N)
    stacked = np.lib.stride_tricks.sliding_window_view(segment, L + H, axis=0)
    stacked = stacked.transpose(0, 2, 1)
    origins = start + np.arange(count, dtype=np.int64)
    return stacked[:, :L, :], stacked[:, L:, :], origins


def windows(ds: TimeSeriesDataset, split: str, L: int, H: int) -> List[WindowSample]:
    """Every (x, y) pair of a split at stride 1; empty when the split is too short."""
    X, Y, origins = window_arrays(ds, split, L, H)
    return [WindowSample(x=X[s], y=Y[s], origin=int(origins[s])) for s in range(len(origins))]


def history_windows(ds: TimeSeriesDataset, L: int, rows: Optional[int] = None):
    """History-only windows of length L over the first ``rows`` rows (default: training rows).

    Returns (windows: S x L x N view, origins: S).
    """
    if rows is None:
        rows = ds.require_split().train_end
    count = rows - L + 1
    if L <= 0 or count <= 0:
        return np.empty((0, max(L, 0), ds.N)), np.empty(0, dtype=np.int64)
    stacked = np.lib.stride_tricks.sliding_window_view(ds.values[:rows], L, axis=0)
    return stacked.transpose(0, 2, 1), np.arange(count, dtype=np.int64)
