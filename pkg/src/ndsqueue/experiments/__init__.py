"""Experiment grids, replication statistics, figure recipes and the CLI."""
from .config import ExperimentConfig, GridPoint, load_config
from .recipes import FIGURES, UnknownFigureError, figure_config, reproduce
from .runner import COLUMNS, Row, rows_to_csv, run_experiment, run_point, write_rows
from .stats import SummaryStats, batch_means

__all__ = [
    "ExperimentConfig", "GridPoint", "load_config",
    "SummaryStats", "batch_means",
    "COLUMNS", "Row", "run_experiment", "run_point", "rows_to_csv", "write_rows",
    "FIGURES", "reproduce", "figure_config", "UnknownFigureError",
]
