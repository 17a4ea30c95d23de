"""Adam, L-BFGS and the two-phase schedule."""

from .adam import adam_run
from .history import (AdamConfig, HistoryEntry, LbfgsConfig, OptimResult, StopRule,
                      TrainingHistory)
from .lbfgs import lbfgs_run, two_loop_direction
from .schedule import two_phase_train

__all__ = ['AdamConfig', 'LbfgsConfig', 'StopRule', 'HistoryEntry', 'TrainingHistory',
           'OptimResult', 'adam_run', 'lbfgs_run', 'two_loop_direction', 'two_phase_train']
