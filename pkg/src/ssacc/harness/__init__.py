"""Configuration, experiment runners and CSV output for the command-line tool."""
from ssacc.harness.config import ConfigError, ExperimentSpec, load_config, parse_config
from ssacc.harness.csvio import read_csv, read_csv_text, render_csv, write_csv
from ssacc.harness.experiments import run_experiment

__all__ = ["ConfigError", "ExperimentSpec", "load_config", "parse_config", "read_csv", "read_csv_text",
           "render_csv", "run_experiment", "write_csv"]
