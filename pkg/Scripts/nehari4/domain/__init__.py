"""
Domain layer - Numerical core, entities and contracts
"""
from .entities import (
    Branch,
    BubbleIntegrals,
    BubbleParams,
    EnergyBreakdown,
    ErrorSeverity,
    ErrorType,
    ExistenceCondition,
    ExpansionFit,
    ExpansionModel,
    FiberingRoots,
    Field,
    GridSpec,
    LocalMinimumAudit,
    MultistartReport,
    PalaisSmaleCheck,
    PathReport,
    Problem,
    RunError,
    Sign,
    SolveOptions,
    SolveReport,
    Spectrum,
    ThresholdGap,
    Thresholds,
)
from .errors import (
    AcceptanceError,
    CoercivityError,
    ConfigError,
    ConvergenceError,
    FitError,
    GridError,
    Nehari4Error,
    PathError,
    QuadratureError,
    RayMissesManifoldError,
    ResourceCapError,
)
from .interfaces import IErrorHandler, IFieldRepository

__all__ = [
    'Branch',
    'BubbleIntegrals',
    'BubbleParams',
    'EnergyBreakdown',
    'ErrorSeverity',
    'ErrorType',
    'ExistenceCondition',
    'ExpansionFit',
    'ExpansionModel',
    'FiberingRoots',
    'Field',
    'GridSpec',
    'LocalMinimumAudit',
    'MultistartReport',
    'PalaisSmaleCheck',
    'PathReport',
    'Problem',
    'RunError',
    'Sign',
    'SolveOptions',
    'SolveReport',
    'Spectrum',
    'ThresholdGap',
    'Thresholds',
    'AcceptanceError',
    'CoercivityError',
    'ConfigError',
    'ConvergenceError',
    'FitError',
    'GridError',
    'Nehari4Error',
    'PathError',
    'QuadratureError',
    'RayMissesManifoldError',
    'ResourceCapError',
    'IErrorHandler',
    'IFieldRepository',
]
