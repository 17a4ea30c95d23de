"""RTE problem descriptions, collocation sets and the least-squares losses."""

from .problem import (AnalyticField, BoundarySet, ConstantEpsilon, LogisticEpsilon, ProblemSpec,
                      SolutionBundle, TrainingSet)
from .losses import (CorrectorSamples, LossBreakdown, PinnObjective, RadiativeConstants,
                     bl_corrected_loss_1d, bl_corrected_loss_2d, hetero_eps_loss,
                     macro_micro_loss, nonlinear_loss, vanilla_loss)

__all__ = ['AnalyticField', 'BoundarySet', 'ConstantEpsilon', 'LogisticEpsilon', 'ProblemSpec',
           'SolutionBundle', 'TrainingSet', 'CorrectorSamples', 'LossBreakdown', 'PinnObjective',
           'RadiativeConstants', 'bl_corrected_loss_1d', 'bl_corrected_loss_2d',
           'hetero_eps_loss', 'macro_micro_loss', 'nonlinear_loss', 'vanilla_loss']
