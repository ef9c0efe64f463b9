"""
Application layer - Use cases for each subcommand
"""
from .acceptance import CRITERIA, CriterionResult, VerifyAllUseCase
from .use_cases import (
    BubbleUseCase,
    MountainPassUseCase,
    ProblemContext,
    SolveSignedUseCase,
    SolveUseCase,
    ThresholdsUseCase,
    WorkflowOutcome,
    build_problem,
    prepare_problem,
)

__all__ = [
    'CRITERIA',
    'CriterionResult',
    'VerifyAllUseCase',
    'BubbleUseCase',
    'MountainPassUseCase',
    'ProblemContext',
    'SolveSignedUseCase',
    'SolveUseCase',
    'ThresholdsUseCase',
    'WorkflowOutcome',
    'build_problem',
    'prepare_problem',
]
