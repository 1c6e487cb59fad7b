import csv
import logging
from pathlib import Path
from typing import Any, Dict, Iterable, List, Sequence

import numpy as np

logger = logging.getLogger(__name__)


def format_value(value: Any) -> str:
    """Round-trip text for one cell: repr for floats, blank for None."""
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return str(value)


class ReportWriter:
    """Write command artifacts under one output directory and remember what was written."""

    def __init__(self, out_dir):
        self.out_dir = Path(out_dir)
        self.out_dir.mkdir(parents=True, exist_ok=True)
        self.outputs: List[str] = []

    def _path(self, filename: str) -> Path:
        path = self.out_dir / filename
        if str(path) not in self.outputs:
            self.outputs.append(str(path))
        return path

    def write_csv(self, filename: str, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
        """
        Write a CSV table with LF line endings.

        Args:
            filename: File name inside the output directory
            header: Column names
            rows: Row values, formatted with ``format_value``

        Returns:
            Path of the written file
        """
        path = self._path(filename)
        with open(path, "w", encoding="utf-8", newline="") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(header)
            count = 0
            for row in rows:
                writer.writerow([format_value(v) for v in row])
                count += 1
        logger.info(f"Wrote {count} rows to {path}")
        return path

    def write_key_values(self, filename: str, values: Dict[str, Any]) -> Path:
        """Flat ``key = value`` text record."""
        path = self._path(filename)
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            for key, value in values.items():
                f.write(f"{key} = {format_value(value)}\n")
        logger.info(f"Wrote {path}")
        return path

    def register(self, path) -> Path:
        """Record an artifact written by someone else (e.g. a checkpoint)."""
        path = Path(path)
        if str(path) not in self.outputs:
            self.outputs.append(str(path))
        return path

    # Domain artifacts

    def write_eval_result(self, result, label: str, channel_names: Sequence[str], stem: str = "eval") -> List[Path]:
        """EvalResult as a one-row CSV plus a key-value record with per-channel MSE."""
        csv_path = self.write_csv(
            f"{stem}.csv",
            ["label", "mse", "mae", "n_samples"],
            [[label, result.mse, result.mae, result.n_samples]],
        )
        record: Dict[str, Any] = {
            "label": label,
            "mse": result.mse,
            "mae": result.mae,
            "n_samples": result.n_samples,
        }
        for name, mse in zip(channel_names, result.per_channel_mse):
            record[f"mse.{name}"] = mse
        for name, mae in zip(channel_names, result.per_channel_mae):
            record[f"mae.{name}"] = mae
        return [csv_path, self.write_key_values(f"{stem}.txt", record)]

    def write_training_log(self, log, filename: str = "training_log.csv", log_elapsed: bool = False) -> Path:
        header = ["epoch", "train_mse", "val_mse"] + (["elapsed_seconds"] if log_elapsed else [])
        rows = []
        for record in log.epochs:
            row = [record.epoch, record.train_mse, record.val_mse]
            if log_elapsed:
                row.append(record.elapsed_seconds)
            rows.append(row)
        return self.write_csv(filename, header, rows)

    def write_channel_scores(self, scores, filename: str = "channel_scores.csv") -> Path:
        return self.write_csv(
            filename,
            [
                "channel",
                "nonstat",
                "sim",
                "g",
                "topk",
                "stationary_val_loss",
                "fusion_val_loss",
                "consistent",
            ],
            [
                [
                    s.channel,
                    s.nonstat,
                    s.sim,
                    s.g,
                    s.selected_topk,
                    s.stationary_val_loss,
                    s.fusion_val_loss,
                    s.consistent,
                ]
                for s in scores
            ],
        )

    def write_entropy_report(self, report, filename: str = "entropy.csv") -> List[Path]:
        csv_path = self.write_csv(
            filename,
            ["origin", "sigma", "h_gauss", "h_kde"],
            [[row.origin, row.sigma, row.h_gauss, row.h_kde] for row in report.rows],
        )
        summary = self.write_key_values(
            "entropy_summary.txt",
            {
                "channel": report.channel,
                "L": report.L,
                "windows": len(report.rows),
                "skipped": report.skipped,
                "correlation_defined": report.correlation_defined,
                "pearson_sigma_hkde": report.pearson_sigma_hkde,
            },
        )
        return [csv_path, summary]

    def write_fusion_weights(
        self, origins, weights, channel_names: Sequence[str], filename: str = "fusion_weights.csv"
    ) -> Path:
        return self.write_csv(
            filename,
            ["origin"] + list(channel_names),
            ([int(o)] + [float(w) for w in row] for o, row in zip(origins, weights)),
        )

    def write_ablation(self, report, filename: str = "ablation.csv") -> List[Path]:
        rows = [[row.variant, row.seed, row.mse, row.mae] for row in report.rows]
        rows += [[name, "mean", report.mean_mse[name], report.mean_mae[name]] for name in report.mean_mse]
        return [self.write_csv(filename, ["variant", "seed", "mse", "mae"], rows)]

    def write_grid_search(self, result, filename: str = "alpha_grid.csv") -> List[Path]:
        rows = [
            [row.alpha, row.val_mse, row.test.mse, row.test.mae, " ".join(str(i) for i in row.selected)]
            for row in result.rows
        ]
        table = self.write_csv(filename, ["alpha", "val_mse", "test_mse", "test_mae", "selected"], rows)
        return [table, self.write_key_values("alpha_grid_best.txt", {"best_alpha": result.best_alpha})]

    def write_oversmoothing(self, report) -> List[Path]:
        values: Dict[str, Any] = {
            "seed": report.seed,
            "generator_slope": report.generator_slope,
            "individual": report.individual,
        }
        for name in (
            "stationary_only_trend",
            "stationary_only_stationary",
            "cdfm_trend",
            "cdfm_stationary",
            "trend_only",
        ):
            stats = getattr(report, name)
            values[f"{name}.std_ratio"] = stats.std_ratio
            values[f"{name}.mean_slope"] = stats.mean_slope
            values[f"{name}.slope_error"] = stats.slope_error
        summary = self.write_key_values("oversmoothing_report.txt", values)
        series = self.write_csv(
            "oversmoothing_series.csv",
            ["step", "history", "truth", "stationary_only", "cdfm"],
            [[p.step, p.history, p.truth, p.stationary_only, p.cdfm] for p in report.series],
        )
        return [summary, series]

    def write_prepared_dataset(self, ds, date_column: str) -> List[Path]:
        """Standardized values, global statistics and split summary of a prepared dataset."""
        values = self.write_csv(
            "standardized.csv",
            [date_column] + list(ds.channel_names),
            ([stamp] + [float(v) for v in row] for stamp, row in zip(ds.timestamps, ds.values)),
        )
        stats = self.write_csv(
            "global_stats.csv",
            ["channel", "mean", "std"],
            [
                [name, float(m), float(s)]
                for name, m, s in zip(ds.channel_names, ds.global_stats.mean, ds.global_stats.std)
            ],
        )
        split = ds.require_split()
        summary = self.write_key_values(
            "split.txt",
            {
                "T": ds.T,
                "N": ds.N,
                "train_rows": split.train_end,
                "val_rows": split.val_end - split.train_end,
                "test_rows": split.test_end - split.val_end,
                "train_end": split.train_end,
                "val_end": split.val_end,
                "test_end": split.test_end,
            },
        )
        return [values, stats, summary]
