"""Benchmark harness: data, protocol, metrics, statistics and reports."""
from .data import MultiTaskDataset, load_csv_tasks, sample_windows, save_csv_tasks, synth_generate
from .evaluation import RunResult, evaluate_online, grid_search, run_stream
from .methods import METHODS, get_method
from .metrics import Metrics, metrics, prefix_regret_losses, regret_curve
from .protocol import ElmConfig, Prepared, SplitSpec, prepare, split_counts
from .stats import FriedmanResult, friedman_fisher
