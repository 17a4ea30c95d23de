"""Experiment configs, the registry of reproductions, drivers and result files."""

from .config import SCHEMA_VERSION, ExperimentConfig, default_sections
from .metrics import both_errors, relative_l2
from .registry import EXPERIMENTS, ExperimentEntry, build_problem, get_entry
from .results import ResultRecord, emit_results
from .runner import (compute_reference, obtain_corrector, run_and_emit, run_experiment,
                     run_many, run_stability)
from .stability import StabilityRow, StabilityTable, run_stability_sweep

__all__ = ['SCHEMA_VERSION', 'ExperimentConfig', 'default_sections', 'relative_l2',
           'both_errors', 'EXPERIMENTS', 'ExperimentEntry', 'build_problem', 'get_entry',
           'ResultRecord', 'emit_results', 'compute_reference', 'obtain_corrector',
           'run_experiment', 'run_and_emit', 'run_many', 'run_stability', 'StabilityRow',
           'StabilityTable', 'run_stability_sweep']
