"""Noise, persistence, configuration, rendering, experiments and validation."""

from .config import ExperimentConfig, config_from_entries, load_config, parse_number, parse_text
from .dataio import load_matrix, save_matrix
from .experiment import CheckResult, RunReport, localization, multiplicity, run_experiment
from .noise import NoiseSpec, add_noise, gaussian_pairs
from .render import PALETTE, emit_grid, palette, write_csv, write_ppm

__all__ = [
    "ExperimentConfig", "config_from_entries", "load_config", "parse_number", "parse_text",
    "load_matrix", "save_matrix", "CheckResult", "RunReport", "localization", "multiplicity",
    "run_experiment", "NoiseSpec", "add_noise", "gaussian_pairs", "PALETTE", "emit_grid",
    "palette", "write_csv", "write_ppm",
]
