"""Multi-run experiments: fusion ablation over seeds and the alpha grid search."""

import logging
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, Field

from config.run_config import TrainConfig
from config.settings import ALPHA_GRID
from forecasting.cdfm import CdfmState
from timeseries.dataset import TimeSeriesDataset
from training.evaluation import EvalResult, evaluate
from training.trainer import TrainingLog, train

logger = logging.getLogger(__name__)

# variant name -> (config overrides, fixed channels or None for normal selection)
ABLATION_VARIANTS: Dict[str, Tuple[dict, Optional[tuple]]] = {
    "stationary_only": ({"fusion": "dynamic"}, ()),
    "nonstationary_only": ({"fusion": "nonstationary"}, None),
    "static_fusion": ({"fusion": "static"}, None),
    "full_channel_fusion": ({"fusion": "dynamic", "alpha": 1.0}, None),
    "cdfm": ({"fusion": "dynamic"}, None),
}


class AblationRow(BaseModel):
    variant: str
    seed: int
    mse: float
    mae: float


class AblationReport(BaseModel):
    rows: List[AblationRow] = Field(default_factory=list)
    mean_mse: Dict[str, float] = Field(default_factory=dict)
    mean_mae: Dict[str, float] = Field(default_factory=dict)


def run_ablation(
    ds: TimeSeriesDataset,
    config: TrainConfig,
    seeds: Sequence[int],
    variants: Optional[Sequence[str]] = None,
) -> AblationReport:
    """Train every variant once per seed and report test MSE / MAE."""
    variants = list(variants or ABLATION_VARIANTS)
    report = AblationReport()
    for name in variants:
        overrides, channels = ABLATION_VARIANTS[name]
        for seed in seeds:
            run_config = config.model_copy(update={**overrides, "seed": seed})
            state, _ = train(ds, run_config, channels=channels)
            result = evaluate(state, ds, "test")
            report.rows.append(AblationRow(variant=name, seed=seed, mse=result.mse, mae=result.mae))
        picked = [row for row in report.rows if row.variant == name]
        report.mean_mse[name] = float(np.mean([row.mse for row in picked]))
        report.mean_mae[name] = float(np.mean([row.mae for row in picked]))
        logger.info(
            f"Ablation {name}: mean test mse={report.mean_mse[name]:.6f} "
            f"mae={report.mean_mae[name]:.6f} over {len(seeds)} seeds"
        )
    return report


class GridRow(BaseModel):
    alpha: float
    val_mse: float
    test: EvalResult
    selected: Tuple[int, ...]


class GridSearchResult(BaseModel):
    rows: List[GridRow] = Field(default_factory=list)
    best_alpha: float


def alpha_grid_search(
    ds: TimeSeriesDataset,
    config: TrainConfig,
    grid: Sequence[float] = ALPHA_GRID,
) -> Tuple[GridSearchResult, CdfmState, TrainingLog]:
    """One model per alpha; the winner has the lowest validation MSE (ties to the smaller alpha)."""
    rows: List[GridRow] = []
    best: Optional[Tuple[float, float, CdfmState, TrainingLog]] = None
    for alpha in sorted(grid):
        state, log = train(ds, config.model_copy(update={"alpha": alpha}))
        val_mse = evaluate(state, ds, "val").mse
        rows.append(
            GridRow(alpha=alpha, val_mse=val_mse, test=evaluate(state, ds, "test"), selected=log.selected)
        )
        if best is None or val_mse < best[0]:
            best = (val_mse, alpha, state, log)
    _, best_alpha, best_state, best_log = best
    logger.info(f"Alpha grid search: best alpha={best_alpha} (val mse={best[0]:.6f})")
    return GridSearchResult(rows=rows, best_alpha=best_alpha), best_state, best_log
