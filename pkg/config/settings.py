import os
import logging
from pathlib import Path

from utils.env_loader import load_environment_variables

_ENV = load_environment_variables()

# Base directories
APP_DIR = Path(_ENV["cdfm_home"] or os.path.expanduser("~/.cdfm"))
LOG_DIR = APP_DIR / "logs"

# Data ingestion
DEFAULT_DATE_COLUMN = "date"
ETT_RATIOS = (0.6, 0.2, 0.2)
DEFAULT_RATIOS = (0.7, 0.1, 0.2)
RATIO_TOLERANCE = 1e-9
# 12/4/4 months of hourly rows; 15-minute files use four times as many
ETT_HOUR_BORDERS = (12 * 30 * 24, 16 * 30 * 24, 20 * 30 * 24)
ETT_MINUTE_FACTOR = 4
SPLIT_SCHEMES = ("auto", "ratio", "ett-hour", "ett-minute")

# Windowing
DEFAULT_LOOKBACK = 96
DEFAULT_HORIZON = 96
HORIZON_MENU = (96, 192, 336, 720)

# Instance normalization
NORM_EPSILON = 1e-5

# DLinear backbone
DEFAULT_KERNEL = 25

# Adam
DEFAULT_LR = 0.005
ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPSILON = 1e-8

# CDFM
LAMBDA_INIT = 0.1
DEFAULT_ALPHA = 0.7
ALPHA_GRID = (0.1, 0.3, 0.5, 0.7, 1.0)
DEFAULT_RHO = 1.0
DEFAULT_TAU = 0.05
FUSION_MODES = ("dynamic", "static", "nonstationary")

# Training loop
DEFAULT_BATCH_SIZE = 32
DEFAULT_MAX_EPOCHS = 10
DEFAULT_PATIENCE = 3
DEFAULT_SEED = 2021
EVAL_CHUNK_SIZE = 512

# Entropy analysis
KDE_MIN_SAMPLES = 8
SILVERMAN_FACTOR = 1.06
KDE_CHUNK_SIZE = 1024
ENTROPY_MIN_WINDOWS = 30

# Synthetic generators
SYNTHETIC_LENGTH = 2000
SYNTHETIC_SLOPE = 0.01
SYNTHETIC_NOISE_STD = 0.1
SYNTHETIC_TREND_CHANNELS = 2
SYNTHETIC_STATIONARY_CHANNELS = 2
AMPLITUDE_PERIOD = 2000
AMPLITUDE_DEPTH = 0.8

# Over-smoothing demonstration (short windows keep trend and noise histories
# hard to tell apart once instance-normalized)
DEMO_LOOKBACK = 24
DEMO_HORIZON = 24
DEMO_KERNEL = 5
DEMO_LR = 0.01
DEMO_MAX_EPOCHS = 40
DEMO_PATIENCE = 5

# Checkpoints and artifacts
CHECKPOINT_FORMAT = "cdfm-checkpoint"
CHECKPOINT_VERSION = 1
MANIFEST_FILE = "manifest.json"

# Exit codes
EXIT_OK = 0
EXIT_RUNTIME_ERROR = 1
EXIT_USAGE_ERROR = 2

# Logging settings
LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
DETAILED_LOG_FORMAT = (
    "%(asctime)s - %(name)s - %(levelname)s - %(filename)s:%(lineno)d - %(message)s"
)
LOG_LEVEL = getattr(logging, (_ENV["log_level"] or "INFO").upper(), logging.INFO)
LOG_FILE = LOG_DIR / "cdfm.log"
MAX_LOG_SIZE = 10 * 1024 * 1024  # 10 MB
LOG_BACKUP_COUNT = 3

# Parallel processing settings
PARALLEL_MAX_WORKERS = None  # None means use CPU count - 1
