"""
Internal project imports to avoid circular dependencies.
"""
# Import this instead of directly importing project modules
from logger_configurator import configure_logging
from monte_carlo import resolve_n_jobs
from results_store import ResultsStore, read_row
from experiments import EXPERIMENTS, ExperimentResult, run_experiment, list_experiments
