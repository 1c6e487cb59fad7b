import sys
import time
import logging
import argparse
from pathlib import Path

from config.run_config import load_config_file, resolve_config
from config.settings import ALPHA_GRID, EXIT_OK, EXIT_RUNTIME_ERROR, FUSION_MODES, HORIZON_MENU, SPLIT_SCHEMES
from exceptions.forecast_exceptions import UsageError
from processors.metadata_generator import MetadataGenerator
from processors.report_writer import ReportWriter
from utils.error_handler import ErrorHandler
from utils.logging_config import setup_logging

# Global logger
logger = logging.getLogger(__name__)


def build_parser():
    """Argument parser with one subcommand per pipeline step."""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--data", help="Input CSV (date column first, numeric channels after)")
    common.add_argument("--date-column", help="Name of the leading date column")
    common.add_argument("--lookback", type=int, help="History length L (default 96)")
    common.add_argument(
        "--horizon", type=int, help=f"Forecast length H (default 96; benchmark horizons {HORIZON_MENU})"
    )
    common.add_argument("--alpha", type=float, help="Ratio of channels considered for fusion")
    common.add_argument("--rho", type=float, help="Weight of the similarity term in channel scores")
    common.add_argument("--tau", type=float, help="Relative validation-loss tolerance of the consistency filter")
    common.add_argument("--lr", type=float, help="Adam learning rate")
    common.add_argument("--batch-size", type=int, help="Mini-batch size")
    common.add_argument("--epochs", type=int, help="Maximum number of epochs")
    common.add_argument("--patience", type=int, help="Non-improving epochs tolerated before stopping")
    common.add_argument("--seed", type=int, help="Random seed")
    common.add_argument("--kernel", type=int, help="Moving-average kernel (odd)")
    common.add_argument("--epsilon", type=float, help="Instance-normalization std floor")
    common.add_argument("--split-scheme", choices=SPLIT_SCHEMES, help="How rows are split")
    common.add_argument("--fusion", choices=FUSION_MODES, help="Fusion variant")
    common.add_argument(
        "--shared-weights",
        action="store_true",
        default=None,
        help="Share one set of DLinear weights across channels",
    )
    common.add_argument(
        "--log-elapsed",
        action="store_true",
        default=None,
        help="Add wall-clock seconds to the training log",
    )
    common.add_argument("--config", help="Flat key = value config file")
    common.add_argument("--out-dir", help="Directory for artifacts (default runs/<command>)")
    common.add_argument("--log-level", default=None, help="Console log level (DEBUG, INFO, ...)")

    parser = argparse.ArgumentParser(description="Channel-wise dynamic fusion forecasting toolkit")
    subparsers = parser.add_subparsers(dest="command", required=True, help="Command to run")

    subparsers.add_parser("prepare", parents=[common], help="Split and standardize a dataset")
    subparsers.add_parser("train", parents=[common], help="Train a model and save a checkpoint")

    evaluate_parser = subparsers.add_parser("evaluate", parents=[common], help="Evaluate a checkpoint")
    evaluate_parser.add_argument("--checkpoint", required=True, help="Checkpoint written by train")
    evaluate_parser.add_argument("--split", default="test", choices=("train", "val", "test"))
    evaluate_parser.add_argument(
        "--variant", default="fused", choices=("fused", "stationary", "nonstationary")
    )

    subparsers.add_parser("baseline", parents=[common], help="Repeat-last-value baseline")

    entropy_parser = subparsers.add_parser(
        "analyze-entropy", parents=[common], help="Variance vs entropy of one channel"
    )
    entropy_parser.add_argument("--channel", required=True, help="Channel name or index")

    subparsers.add_parser("select-channels", parents=[common], help="Channel scores without training")
    subparsers.add_parser("demo-oversmoothing", parents=[common], help="Synthetic over-smoothing demo")

    ablation_parser = subparsers.add_parser("ablation", parents=[common], help="Fusion ablation over seeds")
    ablation_parser.add_argument("--seeds", type=int, nargs="+", help="Seeds (default: seed, seed+1, seed+2)")

    grid_parser = subparsers.add_parser("grid-search", parents=[common], help="Search the channel ratio alpha")
    grid_parser.add_argument("--alphas", type=float, nargs="+", help=f"Grid (default {ALPHA_GRID})")
    return parser


def flag_values(args):
    """Config values given on the command line; None means not given."""
    return {
        "lookback": args.lookback,
        "horizon": args.horizon,
        "alpha": args.alpha,
        "rho": args.rho,
        "tau": args.tau,
        "lr": args.lr,
        "batch_size": args.batch_size,
        "epochs": args.epochs,
        "patience": args.patience,
        "seed": args.seed,
        "kernel": args.kernel,
        "epsilon": args.epsilon,
        "split_scheme": args.split_scheme,
        "fusion": args.fusion,
        "date_column": args.date_column,
        "log_elapsed": args.log_elapsed,
        "individual": False if args.shared_weights else None,
    }


def load_dataset(args, config):
    from timeseries.dataset import apply_split_scheme, load_csv

    if not args.data:
        raise UsageError(f"'{args.command}' needs --data")
    return apply_split_scheme(load_csv(args.data, config.date_column), config.split_scheme)


def run_prepare(args, config, writer):
    ds = load_dataset(args, config)
    writer.write_prepared_dataset(ds, config.date_column)


def run_train(args, config, writer):
    from forecasting.checkpoint import save_checkpoint
    from training.trainer import train

    ds = load_dataset(args, config)
    state, log = train(ds, config)
    writer.register(save_checkpoint(state, writer.out_dir / "checkpoint.txt"))
    writer.write_training_log(log, log_elapsed=config.log_elapsed)
    writer.write_channel_scores(log.scores)


def run_evaluate(args, config, writer, explicit):
    from exceptions.forecast_exceptions import ShapeMismatchError
    from forecasting.checkpoint import load_checkpoint
    from training.evaluation import evaluate, fusion_weight_table

    state = load_checkpoint(args.checkpoint)
    if "L" in explicit and config.L != state.L:
        raise ShapeMismatchError(f"checkpoint was trained with L={state.L}, L={config.L} requested")
    ds = load_dataset(args, config)
    result = evaluate(state, ds, args.split, args.variant, H=config.H if "H" in explicit else None)
    writer.write_eval_result(result, f"{args.variant}_{args.split}", ds.channel_names)
    origins, weights = fusion_weight_table(state, ds, args.split)
    writer.write_fusion_weights(origins, weights, ds.channel_names)
    print(f"mse={result.mse!r} mae={result.mae!r}")


def run_baseline(args, config, writer):
    from training.evaluation import repeat_baseline

    ds = load_dataset(args, config)
    result = repeat_baseline(ds, config.L, config.H)
    writer.write_eval_result(result, "repeat", ds.channel_names, stem="baseline")
    print(f"mse={result.mse!r} mae={result.mae!r}")


def run_analyze_entropy(args, config, writer):
    from analysis.entropy import variance_entropy_report

    ds = load_dataset(args, config)
    report = variance_entropy_report(ds, args.channel, config.L)
    writer.write_entropy_report(report)
    print(f"pearson_sigma_hkde={report.pearson_sigma_hkde!r}")


def run_select_channels(args, config, writer):
    from selection.channel_selector import annotate_scores, channel_scores, select_topk

    ds = load_dataset(args, config)
    scores = channel_scores(ds, config.L, config.rho, config.H)
    writer.write_channel_scores(annotate_scores(scores, select_topk(scores, config.alpha)))


def run_demo_oversmoothing(args, config, writer):
    from training.oversmoothing import oversmoothing_demo

    report = oversmoothing_demo(config.seed)
    writer.write_oversmoothing(report)
    print(
        f"stationary_only_std_ratio={report.stationary_only_trend.std_ratio!r} "
        f"cdfm_std_ratio={report.cdfm_trend.std_ratio!r} "
        f"trend_only_slope_error={report.trend_only.slope_error!r}"
    )


def run_ablation_command(args, config, writer):
    from training.experiments import run_ablation

    ds = load_dataset(args, config)
    seeds = args.seeds or [config.seed, config.seed + 1, config.seed + 2]
    writer.write_ablation(run_ablation(ds, config, seeds))


def run_grid_search(args, config, writer):
    from forecasting.checkpoint import save_checkpoint
    from training.experiments import alpha_grid_search

    ds = load_dataset(args, config)
    result, state, log = alpha_grid_search(ds, config, args.alphas or ALPHA_GRID)
    writer.write_grid_search(result)
    writer.register(save_checkpoint(state, writer.out_dir / "checkpoint.txt"))
    writer.write_channel_scores(log.scores)


def dispatch(args, config, writer, explicit):
    handlers = {
        "prepare": run_prepare,
        "train": run_train,
        "baseline": run_baseline,
        "analyze-entropy": run_analyze_entropy,
        "select-channels": run_select_channels,
        "demo-oversmoothing": run_demo_oversmoothing,
        "ablation": run_ablation_command,
        "grid-search": run_grid_search,
    }
    if args.command == "evaluate":
        return run_evaluate(args, config, writer, explicit)
    return handlers[args.command](args, config, writer)


def parse_log_level(name):
    if name is None:
        return None
    level = logging.getLevelName(name.upper())
    if not isinstance(level, int):
        raise UsageError(f"unknown log level {name!r}")
    return level


def main(argv=None):
    """Main entry point for the application."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        # argparse exits 2 on usage errors and 0 on --help
        return e.code

    def display(message):
        print(message, file=sys.stderr)

    try:
        setup_logging(level=parse_log_level(args.log_level))
        file_values = load_config_file(args.config) if args.config else {}
        flags = {k: v for k, v in flag_values(args).items() if v is not None}
        config = resolve_config(file_values, flags)
        explicit = set(file_values) | {
            {"lookback": "L", "horizon": "H"}.get(key, key) for key in flags
        }

        started = time.perf_counter()
        writer = ReportWriter(Path(args.out_dir or Path("runs") / args.command))
        dispatch(args, config, writer, explicit)

        generator = MetadataGenerator()
        manifest = generator.generate_manifest(
            command=args.command,
            config=config.model_dump(),
            dataset_path=args.data,
            seed=config.seed,
            outputs=writer.outputs,
            duration_seconds=time.perf_counter() - started,
        )
        generator.write_manifest(manifest, writer.out_dir)
        return EXIT_OK
    except KeyboardInterrupt:
        logger.info("KeyboardInterrupt received in main()")
        display("Interrupted")
        return EXIT_RUNTIME_ERROR
    except Exception as e:
        return ErrorHandler.handle_exception(e, display_callback=display)


if __name__ == "__main__":
    sys.exit(main())
